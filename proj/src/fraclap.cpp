#include "htem/fraclap.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <vector>

#include "htem/error.hpp"

namespace htem {

namespace {

using Rule = boost::math::quadrature::gauss<double, 16>;

// Integral of g over [a, b] by the 16-point Gauss-Legendre rule.
template <class G>
double gauss16(const G& g, double a, double b) {
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  const auto& xs = Rule::abscissa();
  const auto& ws = Rule::weights();
  double sum = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double dx = half * xs[k];
    sum += ws[k] * (g(mid - dx) + g(mid + dx));
  }
  return half * sum;
}

struct Pieces {
  double value;
  double fd_error;
};

// One coordinate direction: h(z) = f(x + z) + f(x - z) - 2 f(x) along it.
template <class H>
Pieces directional(const H& h, double alpha, double p, const FracLaplConfig& cfg,
                   int resolution) {
  const double eps = cfg.eps_cutoff;

  // Near the origin: h(z) = f'' z^2 + f'''' z^4 / 12 + O(z^6). With
  // h1 = h(s), h2 = h(2s):  f'' ~ (16 h1 - h2) / (12 s^2),
  // f'''' ~ (h2 - 4 h1) / s^4.
  auto taylor = [&](double s) {
    const double h1 = h(s), h2 = h(2.0 * s);
    const double f2 = (16.0 * h1 - h2) / (12.0 * s * s);
    const double f4 = (h2 - 4.0 * h1) / (s * s * s * s);
    return p * (f2 * std::pow(eps, 2.0 - alpha) / (2.0 - alpha) +
                f4 / 12.0 * std::pow(eps, 4.0 - alpha) / (4.0 - alpha));
  };
  const double near = taylor(cfg.fd_step);
  const double near_check = taylor(2.0 * cfg.fd_step);

  // (eps, 1]: log-spaced panels in s = log z, integrand h(z) p z^(-alpha).
  const int panels = std::max(1, cfg.inner_quad_points / 16) * resolution;
  const double ls = std::log(eps);
  auto inner_g = [&](double s) {
    const double z = std::exp(s);
    return h(z) * p * std::exp(-alpha * s);
  };
  double inner = 0.0;
  for (int k = 0; k < panels; ++k)
    inner += gauss16(inner_g, ls + (0.0 - ls) * k / panels, ls + (0.0 - ls) * (k + 1) / panels);

  // (1, Z]: log-spaced panels, each split so no piece exceeds the width cap.
  const double lz = std::log(cfg.tail_cutoff);
  const double cap = cfg.max_tail_panel / resolution;
  auto outer_g = [&](double z) { return h(z) * p * std::pow(z, -1.0 - alpha); };
  double outer = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double a = std::exp(lz * k / panels), b = std::exp(lz * (k + 1) / panels);
    const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / cap)));
    for (int j = 0; j < pieces; ++j)
      outer += gauss16(outer_g, a + (b - a) * j / pieces, a + (b - a) * (j + 1) / pieces);
  }
  return {near + inner + outer, std::abs(near - near_check)};
}

template <class H>
FracLaplResult adaptive(const H& h, double alpha, double p, const FracLaplConfig& cfg,
                        double tail_error) {
  Pieces coarse = directional(h, alpha, p, cfg, 1);
  FracLaplResult r;
  for (int level = 0;; ++level) {
    const Pieces fine = directional(h, alpha, p, cfg, 2 << level);
    const double reducible = std::abs(fine.value - coarse.value) + fine.fd_error;
    r.value = fine.value;
    r.error_estimate = reducible + tail_error;
    r.doublings = level;
    // Refinement cannot shrink the truncated tail, so only the quadrature
    // part is held to the target.
    if (reducible < cfg.target_error || level >= cfg.max_doublings) break;
    coarse = fine;
  }
  return r;
}

void check_config(const FracLaplConfig& cfg) {
  require(cfg.eps_cutoff > 0.0 && cfg.eps_cutoff < 1.0 && cfg.tail_cutoff > 1.0,
          ErrorCode::ConfigInvalid, "fractional Laplacian needs 0 < eps < 1 < Z_max");
  require(cfg.inner_quad_points >= 16, ErrorCode::ConfigInvalid,
          "fractional Laplacian needs at least 16 nodes per region");
  require(cfg.fd_step > 0.0 && 2.0 * cfg.fd_step < 1.0 && cfg.max_tail_panel > 0.0 &&
              cfg.max_doublings >= 0,
          ErrorCode::ConfigInvalid, "fractional Laplacian step sizes must be positive");
}

// Bound on the neglected integral over z > Z_max (per direction).
double tail_error_bound(const TailBound& tail, double alpha, double p, double zmax) {
  require(tail.lipschitz.has_value() || tail.second_difference.has_value(),
          ErrorCode::TailBoundUnavailable,
          "fractional Laplacian tail needs a Lipschitz or second-difference bound");
  double bound = HUGE_VAL;
  if (tail.lipschitz)
    bound = std::min(bound, 2.0 * *tail.lipschitz * p * std::pow(zmax, 1.0 - alpha) /
                                (alpha - 1.0));
  if (tail.second_difference)
    bound = std::min(bound, *tail.second_difference * p * std::pow(zmax, -alpha) / alpha);
  return bound;
}

}  // namespace

FracLaplResult frac_laplacian(const ScalarField& f, std::span<const double> x,
                              const StableSpec& spec, const FracLaplConfig& cfg,
                              const TailBound& tail) {
  check_config(cfg);
  require(x.size() == spec.dim(), ErrorCode::DimensionMismatch,
          "point dimension differs from the stable dimension");
  const double alpha = spec.alpha(), p = spec.p_alpha();
  const double tail_error = tail_error_bound(tail, alpha, p, cfg.tail_cutoff);
  const double fx = f(x);
  std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end());
  FracLaplResult total;
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto h = [&](double z) {
      xp[i] = x[i] + z;
      xm[i] = x[i] - z;
      const double v = (f(xp) - fx) + (f(xm) - fx);
      xp[i] = xm[i] = x[i];
      return v;
    };
    const FracLaplResult r = adaptive(h, alpha, p, cfg, tail_error);
    total.value += r.value;
    total.error_estimate += r.error_estimate;
    total.doublings = std::max(total.doublings, r.doublings);
  }
  return total;
}

FracLaplResult frac_laplacian_1d(const std::function<double(double)>& f, double x,
                                 const StableSpec& spec, const FracLaplConfig& cfg,
                                 const TailBound& tail) {
  require(spec.dim() == 1, ErrorCode::DimensionMismatch, "1-d overload needs dim 1");
  check_config(cfg);
  const double alpha = spec.alpha(), p = spec.p_alpha();
  const double tail_error = tail_error_bound(tail, alpha, p, cfg.tail_cutoff);
  const double fx = f(x);
  auto h = [&](double z) { return (f(x + z) - fx) + (f(x - z) - fx); };
  return adaptive(h, alpha, p, cfg, tail_error);
}

FracLaplResult frac_laplacian_drift_at_zero(const DriftModel& model, const StableSpec& spec,
                                            const FracLaplConfig& cfg) {
  check_config(cfg);
  require(model.dim() == spec.dim(), ErrorCode::DimensionMismatch,
          "drift and noise dimensions differ");
  const std::size_t d = model.dim();
  TailBound tail;
  tail.lipschitz = model.params().theta1;
  tail.second_difference = model.second_difference_bound();
  const double alpha = spec.alpha(), p = spec.p_alpha();
  const double tail_error = tail_error_bound(tail, alpha, p, cfg.tail_cutoff);

  FracLaplResult out;
  if (model.separable()) {
    // b_j(x) = phi(x_j): only the j-th direction contributes, identically for all j.
    const double f0 = model.phi(0.0);
    auto h = [&](double z) { return (model.phi(z) - f0) + (model.phi(-z) - f0); };
    const FracLaplResult r = adaptive(h, alpha, p, cfg, tail_error);
    out.value = std::sqrt(static_cast<double>(d)) * std::abs(r.value);
    out.error_estimate = static_cast<double>(d) * r.error_estimate;
    out.doublings = r.doublings;
    return out;
  }
  double sumsq = 0.0;
  std::vector<double> buf(d);
  for (std::size_t j = 0; j < d; ++j) {
    ScalarField bj = [&, j](std::span<const double> y) {
      std::vector<double> out_b(d);
      model.eval(y, out_b);
      return out_b[j];
    };
    const std::vector<double> zero(d, 0.0);
    const FracLaplResult r = frac_laplacian(bj, zero, spec, cfg, tail);
    sumsq += r.value * r.value;
    out.error_estimate += r.error_estimate;
    out.doublings = std::max(out.doublings, r.doublings);
  }
  out.value = std::sqrt(sumsq);
  return out;
}

}  // namespace htem
