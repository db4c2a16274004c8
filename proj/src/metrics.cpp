#include "htem/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "htem/error.hpp"
#include "htem/rng.hpp"

namespace htem {

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> samples, std::size_t dim)
    : samples_(std::move(samples)), dim_(dim) {
  require(dim >= 1, ErrorCode::ConfigInvalid, "measure dimension must be positive");
  require(samples_.size() % dim == 0, ErrorCode::ConfigInvalid,
          "sample array size is not a multiple of the dimension");
  for (double v : samples_)
    require(std::isfinite(v), ErrorCode::ConfigInvalid, "empirical measure has a non-finite entry");
  n_ = samples_.size() / dim;
}

EmpiricalMeasure EmpiricalMeasure::from_1d(std::vector<double> samples) {
  return EmpiricalMeasure(std::move(samples), 1);
}

void EmpiricalMeasure::sort() {
  require(dim_ == 1, ErrorCode::DimensionMismatch, "only 1-d measures can be sorted");
  if (!sorted_) std::sort(samples_.begin(), samples_.end());
  sorted_ = true;
}

double w1_sorted(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), ErrorCode::UnequalSampleCounts,
          "W1 needs equal sample counts");
  require(!x.empty(), ErrorCode::UnequalSampleCounts, "W1 needs at least one sample");
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += std::abs(x[i] - y[i]);
  return sum / static_cast<double>(x.size());
}

double w1_1d(std::vector<double> x, std::vector<double> y) {
  require(x.size() == y.size(), ErrorCode::UnequalSampleCounts,
          "W1 needs equal sample counts");
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  return w1_sorted(x, y);
}

W1Estimate w1_1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  require(mu.dim() == 1 && nu.dim() == 1, ErrorCode::DimensionMismatch,
          "w1_1d needs 1-d measures");
  require(mu.n() == nu.n(), ErrorCode::UnequalSampleCounts, "W1 needs equal sample counts");
  std::vector<double> x = mu.samples(), y = nu.samples();
  if (!mu.sorted()) std::sort(x.begin(), x.end());
  if (!nu.sorted()) std::sort(y.begin(), y.end());
  W1Estimate est;
  est.value = w1_sorted(x, y);
  est.n_blocks = 1;
  const std::size_t n = x.size();
  if (n > 1) {
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dev = std::abs(x[i] - y[i]) - est.value;
      ss += dev * dev;
    }
    est.std_error = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
  }
  return est;
}

W1Estimate w1_sliced(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                     std::size_t n_projections, std::uint64_t seed) {
  require(mu.dim() == nu.dim(), ErrorCode::DimensionMismatch, "measures differ in dimension");
  require(mu.n() == nu.n(), ErrorCode::UnequalSampleCounts, "W1 needs equal sample counts");
  require(n_projections >= 1, ErrorCode::ConfigInvalid, "need at least one projection");
  const std::size_t d = mu.dim(), n = mu.n();
  RngStream stream(seed, 0);
  std::vector<double> dir(d), px(n), py(n), values;
  values.reserve(n_projections);
  for (std::size_t p = 0; p < n_projections; ++p) {
    double len = 0.0;
    do {
      len = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double r = std::sqrt(-2.0 * std::log(stream.uniform()));
        dir[i] = r * std::cos(2.0 * std::numbers::pi * stream.uniform());
        len += dir[i] * dir[i];
      }
    } while (len == 0.0);
    len = std::sqrt(len);
    for (double& v : dir) v /= len;
    for (std::size_t j = 0; j < n; ++j) {
      double a = 0.0, b = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        a += dir[i] * mu.at(j, i);
        b += dir[i] * nu.at(j, i);
      }
      px[j] = a;
      py[j] = b;
    }
    values.push_back(w1_1d(px, py));
  }
  W1Estimate est;
  est.n_blocks = n_projections;
  est.value = std::accumulate(values.begin(), values.end(), 0.0) /
              static_cast<double>(n_projections);
  if (n_projections > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - est.value) * (v - est.value);
    est.std_error = std::sqrt(ss / static_cast<double>(n_projections - 1) /
                              static_cast<double>(n_projections));
  }
  return est;
}

std::complex<double> empirical_cf(const EmpiricalMeasure& mu, const std::vector<double>& u) {
  require(u.size() == mu.dim(), ErrorCode::DimensionMismatch,
          "frequency vector has the wrong dimension");
  double re = 0.0, im = 0.0;
  for (std::size_t j = 0; j < mu.n(); ++j) {
    double phase = 0.0;
    for (std::size_t i = 0; i < mu.dim(); ++i) phase += u[i] * mu.at(j, i);
    re += std::cos(phase);
    im += std::sin(phase);
  }
  const double n = static_cast<double>(mu.n());
  return {re / n, im / n};
}

namespace {

// Seeded Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  RngStream stream(seed, 0);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(stream.uniform() * static_cast<double>(i));
    std::swap(perm[i - 1], perm[std::min(j, i - 1)]);
  }
  return perm;
}

}  // namespace

W1Estimate median_of_means(const std::vector<double>& values, std::size_t n_blocks,
                           std::uint64_t seed) {
  require(n_blocks >= 1, ErrorCode::ConfigInvalid, "need at least one block");
  require(!values.empty(), ErrorCode::ConfigInvalid, "median of means of an empty sample");
  const std::size_t n = values.size();
  n_blocks = std::min(n_blocks, n);  // tiny samples: one value per block
  const std::vector<std::size_t> perm = seeded_permutation(n, seed);
  std::vector<double> means(n_blocks);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    const std::size_t lo = n * b / n_blocks, hi = n * (b + 1) / n_blocks;
    // Mean as first value plus mean deviation: exact when all values agree.
    const double base = values[perm[lo]];
    double dev = 0.0;
    for (std::size_t k = lo; k < hi; ++k) dev += values[perm[k]] - base;
    means[b] = base + dev / static_cast<double>(hi - lo);
  }
  W1Estimate est;
  est.n_blocks = n_blocks;
  est.value = median(means);
  if (n_blocks > 1) {
    const double mean = std::accumulate(means.begin(), means.end(), 0.0) /
                        static_cast<double>(n_blocks);
    double ss = 0.0;
    for (double m : means) ss += (m - mean) * (m - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n_blocks - 1));
    est.std_error = 1.2533 * sd / std::sqrt(static_cast<double>(n_blocks));
  }
  return est;
}

W1Estimate mom_abs_moment(const EmpiricalMeasure& mu, double power, std::size_t n_blocks,
                          std::uint64_t seed) {
  require(power > 0.0, ErrorCode::Domain, "moment power must be positive");
  require(n_blocks >= 8, ErrorCode::ConfigInvalid, "median of means needs at least 8 blocks");
  std::vector<double> v(mu.n());
  for (std::size_t j = 0; j < mu.n(); ++j) {
    double r;
    if (mu.dim() == 1) {
      r = std::abs(mu.at(j, 0));
    } else {
      double s = 0.0;
      for (std::size_t i = 0; i < mu.dim(); ++i) s += mu.at(j, i) * mu.at(j, i);
      r = std::sqrt(s);
    }
    v[j] = power == 1.0 ? r : std::pow(r, power);
  }
  return median_of_means(v, n_blocks, seed);
}

double quantile(std::vector<double> v, double p) {
  require(!v.empty(), ErrorCode::ConfigInvalid, "quantile of an empty sample");
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

double iqr(std::vector<double> v) {
  return quantile(v, 0.75) - quantile(v, 0.25);
}

}  // namespace htem
