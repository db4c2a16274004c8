#include "htem/stable.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <string>

#include "htem/error.hpp"

namespace htem {

using std::numbers::pi;

double compute_p_alpha(double alpha) {
  require(std::isfinite(alpha) && alpha > 0.0 && alpha < 2.0, ErrorCode::Domain,
          "p_alpha requires 0 < alpha < 2, got " + std::to_string(alpha));
  const double log_p = std::log(alpha) + (alpha - 1.0) * std::numbers::ln2 -
                       0.5 * std::log(pi) + std::lgamma(0.5 * alpha + 0.5) -
                       std::lgamma(1.0 - 0.5 * alpha);
  return std::exp(log_p);
}

StableSpec::StableSpec(double alpha, std::size_t dim) : alpha_(alpha), dim_(dim) {
  require(std::isfinite(alpha) && alpha > 1.0 && alpha < 2.0, ErrorCode::Domain,
          "stability index must satisfy 1 < alpha < 2, got " +
              std::to_string(alpha));
  require(dim >= 1, ErrorCode::Domain, "dimension must be positive");
  p_alpha_ = compute_p_alpha(alpha);
  sigma_ = std::pow(alpha / (2.0 * p_alpha_), 1.0 / alpha);
}

double sample_stable_1d(RngStream& stream, double alpha, double scale) {
  // S = sin(a v) / cos(v)^(1/a) * (cos((1-a) v) / w)^((1-a)/a), with the
  // powers folded into one exp and cos((1-a) v) expanded by angle addition.
  const double v = pi * (stream.uniform() - 0.5);
  const double w = -std::log(stream.uniform());
  double sv, cv, sa, ca;
  sincos(v, &sv, &cv);
  sincos(alpha * v, &sa, &ca);
  const double c = cv * ca + sv * sa;
  const double e = ((1.0 - alpha) * std::log(c / w) - std::log(cv)) / alpha;
  return scale * (sa * std::exp(e));
}

double sample_pareto_1d(RngStream& stream, double alpha) {
  const std::uint64_t word = stream.next_u64();
  const double u = RngStream::to_open_unit(word);
  double mag = std::exp(-std::log(u) / alpha);
  // u within 2^-52 of 1 rounds the magnitude to exactly 1; keep the support open.
  if (!(mag > 1.0)) mag = std::nextafter(1.0, 2.0);
  return (word & 1u) ? -mag : mag;
}

void sample_stable_vector(RngStream& stream, const StableSpec& spec,
                          double scale, std::span<double> out) {
  require(out.size() == spec.dim(), ErrorCode::DimensionMismatch,
          "output span does not match the stable dimension");
  for (double& x : out) x = sample_stable_1d(stream, spec.alpha(), scale);
}

std::vector<double> sample_stable_vector(RngStream& stream,
                                         const StableSpec& spec, double scale) {
  std::vector<double> out(spec.dim());
  sample_stable_vector(stream, spec, scale, out);
  return out;
}

double stable_abs_moment(double alpha, double p) {
  require(alpha > 0.0 && alpha < 2.0, ErrorCode::Domain,
          "stable_abs_moment requires 0 < alpha < 2");
  require(p > -1.0, ErrorCode::Domain, "moment order must exceed -1");
  require(p < alpha, ErrorCode::MomentUndefined,
          "E|S|^p is infinite for p >= alpha (p=" + std::to_string(p) +
              ", alpha=" + std::to_string(alpha) + ")");
  if (p == 0.0) return 1.0;
  const double log_m = p * std::numbers::ln2 + std::lgamma(0.5 * (1.0 + p)) +
                       std::lgamma(1.0 - p / alpha) - 0.5 * std::log(pi) -
                       std::lgamma(1.0 - 0.5 * p);
  return std::exp(log_m);
}

// ---------------------------------------------------------------------------
// StableLaw

namespace {

struct SegmentSpec {
  double t_end;
  int intervals;
};
// Hermite error is about step^4 times the fourth derivative of g over 384; these keep it near 1e-13.
constexpr SegmentSpec kSegments[] = {{2.0, 8192}, {8.0, 2048}, {40.0, 2048}};
constexpr int kSeriesTerms = 120;
constexpr int kTailTerms = 60;

// Zolotarev's V function for beta = 0, in logs.
inline double log_v(double theta, double alpha) {
  const double a1 = alpha / (alpha - 1.0);
  return a1 * (std::log(std::cos(theta)) - std::log(std::sin(alpha * theta))) +
         std::log(std::cos((alpha - 1.0) * theta)) - std::log(std::cos(theta));
}

// The double-exponential rule copes with the non-analytic endpoint
// behaviour of the integrands below (powers 1/(alpha-1) of cos theta).
boost::math::quadrature::tanh_sinh<double>& quadrature() {
  static boost::math::quadrature::tanh_sinh<double> rule;
  return rule;
}

}  // namespace

StableLaw::StableLaw(double alpha) : alpha_(alpha) {
  require(alpha > 1.0 && alpha < 2.0, ErrorCode::Domain,
          "StableLaw requires 1 < alpha < 2");

  // F(x) - 1/2 = (1/(pi a)) sum_k (-1)^k Gamma((2k+1)/a) x^(2k+1)/(2k+1)!
  for (int k = 0; k < kSeriesTerms; ++k) {
    const double n = 2.0 * k + 1.0;
    const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
    series_s_.push_back(sgn * std::exp(std::lgamma(n / alpha) - std::lgamma(n + 1.0)) /
                        (pi * alpha));
    series_d_.push_back(sgn * std::exp(std::lgamma(n / alpha) - std::lgamma(n)) /
                        (pi * alpha));
  }
  // P(S > x) ~ (1/pi) sum_k (-1)^(k+1) Gamma(a k)/k! sin(k pi a/2) x^(-a k)
  tail_c_.push_back(0.0);
  tail_abs_.push_back(0.0);
  for (int k = 1; k < kTailTerms; ++k) {
    const double mag = std::exp(std::lgamma(alpha * k) - std::lgamma(k + 1.0)) / pi;
    const double sgn = (k % 2 == 1) ? 1.0 : -1.0;
    tail_c_.push_back(sgn * mag * std::sin(k * pi * alpha / 2.0));
    tail_abs_.push_back(mag);
  }

  for (double candidate : {4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 15.0, 20.0, 30.0, 50.0, 80.0}) {
    double s, d;
    if (tail_series(candidate, s, d)) {
      x_tail_ = candidate;
      break;
    }
  }
  require(x_tail_ > 0.0, ErrorCode::Domain, "asymptotic tail series did not converge");

  // x(t) solves P(S > x) = exp(-t)/2, and dx/dt = q / f(x).
  double x = 0.0, dxdt = 0.5 / density(0.0);
  double t_prev = 0.0;
  tab_g_.push_back(0.0);
  tab_dg_.push_back(dxdt);
  for (const SegmentSpec& spec : kSegments) {
    const double step = (spec.t_end - t_prev) / spec.intervals;
    segments_.push_back({t_prev, step, tab_g_.size() - 1});
    for (int i = 1; i <= spec.intervals; ++i) {
      const double t = t_prev + i * step;
      const double q = 0.5 * std::exp(-t);
      x += step * dxdt;
      double f = 0.0;
      for (int it = 0; it < 30; ++it) {
        double s;
        if (x >= x_tail_ && tail_series(x, s, f)) {
          // Newton on log P(S > x) converges from further out in the tail.
          const double dx = (std::log(s) - std::log(q)) * s / f;
          x += dx;
          if (std::abs(dx) <= 1e-14 * x) break;
        } else {
          s = survival(x);
          f = density(x);
          const double dx = (s - q) / f;
          x += dx;
          if (std::abs(dx) <= 1e-14 * std::max(1.0, x)) break;
        }
      }
      dxdt = q / f;
      const double decay = std::exp(-t / alpha);
      tab_g_.push_back(x * decay);
      tab_dg_.push_back((dxdt - x / alpha) * decay);
    }
    t_prev = spec.t_end;
  }
  t_max_ = t_prev;
  g_inf_ = std::pow(2.0 * tail_c_[1], 1.0 / alpha);
}

double StableLaw::series_survival(double x) const {
  const double x2 = x * x;
  double pw = x, sum = 0.0;
  for (double c : series_s_) {
    const double term = c * pw;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    pw *= x2;
  }
  return 0.5 - sum;
}

double StableLaw::series_density(double x) const {
  const double x2 = x * x;
  double pw = 1.0, sum = 0.0;
  for (double c : series_d_) {
    const double term = c * pw;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    pw *= x2;
  }
  return sum;
}

bool StableLaw::tail_series(double x, double& survival, double& density) const {
  const double y = std::pow(x, -alpha_);
  double yk = y, s = 0.0, d = 0.0, last = HUGE_VAL;
  for (int k = 1; k < kTailTerms; ++k) {
    const double mag = tail_abs_[k] * yk;
    if (mag > last) return false;  // the asymptotic series started diverging
    s += tail_c_[k] * yk;
    d += tail_c_[k] * yk * alpha_ * k / x;
    last = mag;
    if (mag < 1e-17 * std::abs(s)) {
      survival = s;
      density = d;
      return true;
    }
    yk *= y;
  }
  return false;
}

double StableLaw::integral_survival(double x) const {
  const double c = std::pow(x, alpha_ / (alpha_ - 1.0));
  const double a = alpha_;
  auto g = [c, a](double theta) {
    if (theta <= 0.0) return 0.0;
    if (theta >= pi / 2) return 1.0;
    const double lv = log_v(theta, a);
    if (!(lv < 700.0)) return 0.0;
    return std::exp(-c * std::exp(lv));
  };
  const double integral =
      quadrature().integrate(g, 0.0, pi / 2, 1e-14);
  return integral / pi;
}

double StableLaw::integral_density(double x) const {
  const double c = std::pow(x, alpha_ / (alpha_ - 1.0));
  const double a = alpha_;
  auto g = [c, a](double theta) {
    if (theta <= 0.0 || theta >= pi / 2) return 0.0;
    const double lv = log_v(theta, a);
    if (!(lv < 700.0)) return 0.0;  // exp(-c V) underflows long before
    return std::exp(lv - c * std::exp(lv));
  };
  const double integral =
      quadrature().integrate(g, 0.0, pi / 2, 1e-14);
  return alpha_ * std::pow(x, 1.0 / (alpha_ - 1.0)) / (pi * (alpha_ - 1.0)) * integral;
}

double StableLaw::survival(double x) const {
  if (x < 0.0) return 1.0 - survival(-x);
  if (x <= x_series_) return series_survival(x);
  if (x >= x_tail_) {
    double s, d;
    if (tail_series(x, s, d)) return s;
  }
  return integral_survival(x);
}

double StableLaw::density(double x) const {
  x = std::abs(x);
  if (x <= x_series_) return series_density(x);
  if (x >= x_tail_) {
    double s, d;
    if (tail_series(x, s, d)) return d;
  }
  return integral_density(x);
}

double StableLaw::cdf(double x) const { return 1.0 - survival(x); }

void StableLaw::tail_shape_and_slope(double t, double& g, double& dg) const {
  if (t >= t_max_) {
    g = g_inf_;
    dg = 0.0;
    return;
  }
  std::size_t k = 0;
  while (k + 1 < segments_.size() && t >= segments_[k + 1].t0) ++k;
  const Segment& seg = segments_[k];
  const double s = (t - seg.t0) / seg.step;
  const auto j = static_cast<std::size_t>(s);
  const std::size_t i = seg.first + j;
  const double u = s - static_cast<double>(j);
  const double u2 = u * u, u3 = u2 * u;
  const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u;
  const double h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
  const double m0 = seg.step * tab_dg_[i], m1 = seg.step * tab_dg_[i + 1];
  g = h00 * tab_g_[i] + h10 * m0 + h01 * tab_g_[i + 1] + h11 * m1;
  dg = ((6 * u2 - 6 * u) * (tab_g_[i] - tab_g_[i + 1]) + (3 * u2 - 4 * u + 1) * m0 +
        (3 * u2 - 2 * u) * m1) /
       seg.step;
}

double StableLaw::tail_shape(double t) const {
  if (t <= 0.0) return 0.0;
  double g, dg;
  tail_shape_and_slope(t, g, dg);
  return g;
}

double StableLaw::exp_level_of_magnitude(double m) const {
  if (!(m > 0.0)) return 0.0;
  const double x_max = g_inf_ * std::exp(t_max_ / alpha_);
  if (m >= x_max) return alpha_ * std::log(m / g_inf_);
  // Safeguarded Newton on log x(t) = log m; x(t) is increasing.
  double lo = 0.0, hi = t_max_;
  // Start from the larger of the near-origin line x ~ t g'(0) and the tail law.
  double t = std::min(std::max(alpha_ * std::log(m / g_inf_), m / tab_dg_[0]), t_max_);
  if (!(t > lo && t < hi)) t = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    double g, dg;
    tail_shape_and_slope(t, g, dg);
    const double x = g * std::exp(t / alpha_);
    if (x < m) lo = t; else hi = t;
    const double f = std::log(x / m);
    const double slope = dg / g + 1.0 / alpha_;
    double next = t - f / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-15 * std::max(1.0, t) || hi - lo <= 1e-15 * std::max(1.0, t))
      return next;
    t = next;
  }
  return t;
}

double StableLaw::magnitude_at_exp_level(double t) const {
  if (t <= 0.0) return 0.0;
  return tail_shape(t) * std::exp(t / alpha_);
}

double StableLaw::upper_quantile(double q) const {
  require(q > 0.0 && q <= 0.5, ErrorCode::Domain, "upper_quantile requires q in (0, 1/2]");
  return magnitude_at_exp_level(-std::log(2.0 * q));
}

ParetoStablePair sample_pareto_stable_pair(RngStream& stream, const StableLaw& law) {
  const std::uint64_t word = stream.next_u64();
  const double t = -std::log(RngStream::to_open_unit(word));
  const double e = std::exp(t / law.alpha());
  const double mag = e > 1.0 ? e : std::nextafter(1.0, 2.0);
  const double stable = law.tail_shape(t) * e;
  return (word & 1u) ? ParetoStablePair{-mag, -stable} : ParetoStablePair{mag, stable};
}

}  // namespace htem
