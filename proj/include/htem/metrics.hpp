#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace htem {

/// An empirical law: n samples in R^d, row-major.
class EmpiricalMeasure {
 public:
  /// Throws ConfigInvalid on non-finite entries or a size not divisible by d.
  EmpiricalMeasure(std::vector<double> samples, std::size_t dim);
  static EmpiricalMeasure from_1d(std::vector<double> samples);

  std::size_t n() const noexcept { return n_; }
  std::size_t dim() const noexcept { return dim_; }
  bool sorted() const noexcept { return sorted_; }
  const std::vector<double>& samples() const noexcept { return samples_; }
  double at(std::size_t i, std::size_t j) const { return samples_[i * dim_ + j]; }

  /// Sorts a 1-d measure in place and sets the sorted flag.
  void sort();

 private:
  std::vector<double> samples_;
  std::size_t dim_;
  std::size_t n_;
  bool sorted_ = false;
};

struct W1Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_blocks = 0;
};

/// Exact W1 between two equal-size 1-d empirical measures:
/// (1/n) sum_i |x_(i) - y_(i)|. std_error is the naive standard error of
/// the matched differences (a dispersion hint only).
W1Estimate w1_1d(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);
/// Same on raw vectors (copied and sorted).
double w1_1d(std::vector<double> x, std::vector<double> y);
/// Same on vectors that are already sorted ascending.
double w1_sorted(const std::vector<double>& x, const std::vector<double>& y);

/// Sliced surrogate for d > 1: mean over n_projections uniformly random
/// directions of the 1-d W1 of the projections. It is not W1; it is a
/// trend indicator only. std_error is the spread over directions / sqrt(P).
W1Estimate w1_sliced(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                     std::size_t n_projections, std::uint64_t seed);

/// (1/n) sum_j exp(i <u, x_j>).
std::complex<double> empirical_cf(const EmpiricalMeasure& mu, const std::vector<double>& u);

/// Median-of-means estimate of E|X|^power (|.| the Euclidean norm). Samples
/// are shuffled with a seeded permutation and cut into n_blocks blocks by
/// index. std_error = 1.2533 * sd(block means) / sqrt(n_blocks). n_blocks >= 8;
/// samples smaller than that use one value per block.
W1Estimate mom_abs_moment(const EmpiricalMeasure& mu, double power, std::size_t n_blocks = 32,
                          std::uint64_t seed = 0x5eed);

/// Median-of-means of arbitrary values (same blocking rule).
W1Estimate median_of_means(const std::vector<double>& values, std::size_t n_blocks = 32,
                           std::uint64_t seed = 0x5eed);

double median(std::vector<double> v);
/// Interquartile range with linear interpolation between order statistics.
double iqr(std::vector<double> v);
double quantile(std::vector<double> v, double p);

}  // namespace htem
