#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "htem/rng.hpp"

namespace htem {

/// Lévy-measure normalisation p_alpha of a symmetric alpha-stable component
/// whose Lévy measure is p_alpha / |z|^(1+alpha), i.e. whose characteristic
/// function is exp(-|u|^alpha). Defined for 0 < alpha < 2.
double compute_p_alpha(double alpha);

/// Stability index together with the constants derived from it.
class StableSpec {
 public:
  /// Throws Domain unless 1 < alpha < 2 and dim >= 1.
  StableSpec(double alpha, std::size_t dim);

  double alpha() const noexcept { return alpha_; }
  std::size_t dim() const noexcept { return dim_; }
  double p_alpha() const noexcept { return p_alpha_; }
  /// (alpha / (2 p_alpha))^(1/alpha); rescales Pareto jumps to the stable
  /// tail.
  double sigma() const noexcept { return sigma_; }

 private:
  double alpha_;
  std::size_t dim_;
  double p_alpha_;
  double sigma_;
};

/// One symmetric alpha-stable draw with characteristic function
/// exp(-scale^alpha |u|^alpha) (Chambers-Mallows-Stuck, beta = 0).
/// Consumes exactly two words of the stream.
double sample_stable_1d(RngStream& stream, double alpha, double scale);

/// One symmetric Pareto draw: |Z| = U^(-1/alpha) with a fair sign, so
/// |Z| > 1 and the density is alpha / (2 |z|^(alpha+1)). Consumes one word.
double sample_pareto_1d(RngStream& stream, double alpha);

/// d i.i.d. stable components, drawn in component order.
std::vector<double> sample_stable_vector(RngStream& stream,
                                         const StableSpec& spec, double scale);
void sample_stable_vector(RngStream& stream, const StableSpec& spec,
                          double scale, std::span<double> out);

/// E|S|^p for S symmetric alpha-stable with characteristic function
/// exp(-|u|^alpha); finite iff p < alpha. Closed form
/// 2^p Gamma((1+p)/2) Gamma(1-p/alpha) / (sqrt(pi) Gamma(1-p/2)).
double stable_abs_moment(double alpha, double p);

/// Distribution function of the standard symmetric alpha-stable law
/// (characteristic function exp(-|u|^alpha)), 1 < alpha < 2.
///
/// Evaluation combines the convergent power series near the origin, the
/// Zolotarev/Nolan integral representation in the body, and the
/// asymptotic tail series far out. Quantiles are served from a cubic
/// Hermite table of g(t) = x(t) exp(-t/alpha), where x(t) is the magnitude
/// with P(S > x) = exp(-t)/2. g tends to a constant as t grows, so the
/// table stays accurate over the whole tail, and a Pareto magnitude
/// exp(t/alpha) pairs with the stable magnitude g(t) exp(t/alpha) of the
/// same tail probability.
class StableLaw {
 public:
  explicit StableLaw(double alpha);

  double alpha() const noexcept { return alpha_; }

  double density(double x) const;
  /// P(S > x).
  double survival(double x) const;
  double cdf(double x) const;

  /// x >= 0 with P(S > x) = q for q in (0, 1/2].
  double upper_quantile(double q) const;
  /// Same as upper_quantile(exp(-t) / 2) for t >= 0, without the round trip.
  double magnitude_at_exp_level(double t) const;
  /// magnitude_at_exp_level(t) * exp(-t / alpha).
  double tail_shape(double t) const;
  /// Inverse of magnitude_at_exp_level: t >= 0 with P(|S| > m) = exp(-t).
  double exp_level_of_magnitude(double m) const;

 private:
  double series_survival(double x) const;
  double series_density(double x) const;
  bool tail_series(double x, double& survival, double& density) const;
  double integral_survival(double x) const;
  double integral_density(double x) const;
  void tail_shape_and_slope(double t, double& g, double& dg) const;

  double alpha_;
  double x_series_ = 1.0;  // power series used for x <= x_series_
  double x_tail_ = 0.0;    // asymptotic series used for x >= x_tail_
  std::vector<double> series_s_, series_d_;  // power-series coefficients
  std::vector<double> tail_c_, tail_abs_;    // asymptotic-series coefficients
  // The table is uniform on each of a few t-segments, finest near t = 0
  // where g bends most. Beyond the last segment g(t) is its limit g_inf_.
  struct Segment {
    double t0;
    double step;
    std::size_t first;  // index of the segment's first node
  };
  std::vector<Segment> segments_;
  double t_max_;
  double g_inf_;
  std::vector<double> tab_g_;
  std::vector<double> tab_dg_;
};

/// Draw a symmetric Pareto variable and the symmetric stable variable
/// comoving with it in tail probability, from a single word: |Z| = U^(-1/alpha)
/// and |S| is the stable magnitude exceeded with probability U; the two share
/// one sign.
/// The Pareto component is bit-identical to sample_pareto_1d on the same
/// stream state.
struct ParetoStablePair {
  double pareto;
  double stable;
};
ParetoStablePair sample_pareto_stable_pair(RngStream& stream, const StableLaw& law);

}  // namespace htem
