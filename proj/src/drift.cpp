#include "htem/drift.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <sstream>

#include "htem/error.hpp"
#include "htem/rng.hpp"

namespace htem {

namespace {

// max |tanh''| = 4 / (3 sqrt 3), attained at atanh(1/sqrt 3); max |tanh'''| = 2
// at the origin. Both were located by a dense numerical scan and are checked
// again in the test suite.
constexpr double kMaxTanh2 = 0.769800358919501;
constexpr double kMaxTanh3 = 2.0;

std::string format_point(std::span<const double> x) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ')';
  return os.str();
}

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

// Standard normal pair by the Box-Muller transform.
void normal_pair(RngStream& stream, double& z0, double& z1) {
  const double r = std::sqrt(-2.0 * std::log(stream.uniform()));
  const double a = 2.0 * std::numbers::pi * stream.uniform();
  z0 = r * std::cos(a);
  z1 = r * std::sin(a);
}

void uniform_in_ball(RngStream& stream, double radius, std::span<double> out) {
  const std::size_t d = out.size();
  double len = 0.0;
  do {
    for (std::size_t i = 0; i < d; i += 2) {
      double z0, z1;
      normal_pair(stream, z0, z1);
      out[i] = z0;
      if (i + 1 < d) out[i + 1] = z1;
    }
    len = norm2(out);
  } while (len == 0.0);
  const double r = radius * std::pow(stream.uniform(), 1.0 / static_cast<double>(d));
  for (double& v : out) v *= r / len;
}

}  // namespace

const char* drift_kind_name(DriftKind kind) {
  switch (kind) {
    case DriftKind::OU: return "ou";
    case DriftKind::Sine: return "sine";
    case DriftKind::Tanh: return "tanh";
    case DriftKind::Custom: return "custom";
  }
  return "unknown";
}

DriftModel DriftModel::ou(double theta, std::size_t dim) {
  require(std::isfinite(theta) && theta > 0.0, ErrorCode::Domain, "OU drift needs theta > 0");
  require(dim >= 1, ErrorCode::Domain, "drift dimension must be positive");
  DriftModel m;
  m.kind_ = DriftKind::OU;
  m.name_ = "ou";
  m.dim_ = dim;
  m.family_param_ = theta;
  m.params_ = {theta, 0.0, 0.0, theta, 0.0, 0.0};
  m.second_diff_ = 0.0;
  return m;
}

DriftModel DriftModel::sine_perturbed(double a, std::size_t dim) {
  require(std::isfinite(a) && a > 0.0 && a < 1.0, ErrorCode::Domain,
          "sine drift needs 0 < a < 1, got " + std::to_string(a));
  require(dim >= 1, ErrorCode::Domain, "drift dimension must be positive");
  DriftModel m;
  m.kind_ = DriftKind::Sine;
  m.name_ = "sine";
  m.dim_ = dim;
  m.family_param_ = a;
  m.params_ = {1.0 + a, a, a, 1.0 - a, 0.0, 0.0};
  m.second_diff_ = 4.0 * a;
  return m;
}

DriftModel DriftModel::tanh_distant(std::size_t dim) {
  require(dim >= 1, ErrorCode::Domain, "drift dimension must be positive");
  DriftModel m;
  m.kind_ = DriftKind::Tanh;
  m.name_ = "tanh";
  m.dim_ = dim;
  m.params_ = {1.0, 2.0 * kMaxTanh2, 2.0 * kMaxTanh3, 0.5, 8.0 * static_cast<double>(dim),
               0.0};
  m.second_diff_ = 8.0;
  return m;
}

DriftModel DriftModel::custom(std::string name, std::size_t dim, Function fn,
                              DriftParams declared, std::optional<double> second_difference_bound,
                              std::size_t samples, double radius, std::uint64_t seed) {
  require(dim >= 1, ErrorCode::Domain, "drift dimension must be positive");
  require(static_cast<bool>(fn), ErrorCode::ConfigInvalid, "custom drift needs a function");
  require(declared.theta4 > 0.0 && declared.theta1 >= 0.0 && declared.theta2 >= 0.0 &&
              declared.theta3 >= 0.0 && declared.K >= 0.0,
          ErrorCode::Domain, "custom drift constants out of range");
  DriftModel m;
  m.kind_ = DriftKind::Custom;
  m.name_ = std::move(name);
  m.dim_ = dim;
  m.fn_ = std::move(fn);
  m.second_diff_ = second_difference_bound;
  m.params_ = declared;
  std::vector<double> zero(dim, 0.0), b0(dim);
  m.eval(zero, b0);
  m.params_.b0_norm = norm2(b0);
  const CertificationReport report = certify(m, samples, radius, seed);
  require(report.passed, ErrorCode::BoundViolated,
          "custom drift '" + m.name_ + "' failed certification: " + report.message);
  return m;
}

DriftModel DriftModel::with_params(const DriftParams& params) const {
  DriftModel m = *this;
  m.params_ = params;
  return m;
}

double DriftModel::phi(double v) const {
  switch (kind_) {
    case DriftKind::OU: return -family_param_ * v;
    case DriftKind::Sine: return -v + family_param_ * std::sin(v);
    case DriftKind::Tanh: return -v + 2.0 * std::tanh(v);
    case DriftKind::Custom: break;
  }
  fail(ErrorCode::ConfigInvalid, "phi() is only defined for separable drifts");
}

void DriftModel::eval(std::span<const double> x, std::span<double> out) const {
  if (kind_ == DriftKind::Custom) {
    fn_(x, out);
    return;
  }
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = phi(x[i]);
}

std::vector<double> DriftModel::operator()(const std::vector<double>& x) const {
  require(x.size() == dim_, ErrorCode::DimensionMismatch, "drift input has wrong dimension");
  std::vector<double> out(dim_);
  eval(x, out);
  return out;
}

double DriftModel::L0() const { return std::sqrt(2.0 * params_.K / params_.theta4); }

double jacobian_norm_fd(const DriftModel& model, std::span<const double> x) {
  const std::size_t d = model.dim();
  Eigen::MatrixXd J(d, d);
  std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end()), bp(d), bm(d);
  for (std::size_t j = 0; j < d; ++j) {
    const double h = 1e-5 * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    model.eval(xp, bp);
    model.eval(xm, bm);
    for (std::size_t i = 0; i < d; ++i) J(i, j) = (bp[i] - bm[i]) / (xp[j] - xm[j]);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  if (d == 1) return std::abs(J(0, 0));
  return Eigen::JacobiSVD<Eigen::MatrixXd>(J).singularValues()(0);
}

CertificationReport certify(const DriftModel& model, std::size_t samples, double radius,
                            std::uint64_t seed) {
  require(samples >= 1, ErrorCode::ConfigInvalid, "certify needs at least one sample");
  require(radius > 0.0, ErrorCode::ConfigInvalid, "certify needs a positive radius");
  constexpr double kTol = 1e-6;
  const std::size_t d = model.dim();
  const DriftParams& p = model.params();
  CertificationReport r;
  r.samples = samples;
  r.radius = radius;

  RngStream stream(seed, 0);
  std::vector<double> x(d), y(d), bx(d), by(d);
  for (std::size_t s = 0; s < samples; ++s) {
    uniform_in_ball(stream, radius, x);
    uniform_in_ball(stream, radius, y);

    const double jn = jacobian_norm_fd(model, x);
    if (jn > r.max_jacobian_norm) {
      r.max_jacobian_norm = jn;
      r.jacobian_witness = x;
    }

    model.eval(x, bx);
    model.eval(y, by);
    double inner = 0.0, dist2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      inner += (bx[i] - by[i]) * (x[i] - y[i]);
      dist2 += (x[i] - y[i]) * (x[i] - y[i]);
    }
    const double slack = inner + p.theta4 * dist2 - p.K;
    if (slack > r.worst_dissipativity_slack) {
      r.worst_dissipativity_slack = slack;
      r.dissipativity_witness_x = x;
      r.dissipativity_witness_y = y;
    }
  }

  r.jacobian_ok = r.max_jacobian_norm <= p.theta1 * (1.0 + kTol) + kTol;
  r.dissipativity_ok = r.worst_dissipativity_slack <= kTol;
  r.passed = r.jacobian_ok && r.dissipativity_ok;
  std::ostringstream msg;
  msg.precision(10);
  if (!r.jacobian_ok)
    msg << "Jacobian norm " << r.max_jacobian_norm << " exceeds theta1 = " << p.theta1
        << " at x = " << format_point(r.jacobian_witness) << ". ";
  if (!r.dissipativity_ok)
    msg << "dissipativity violated by " << r.worst_dissipativity_slack
        << " at x = " << format_point(r.dissipativity_witness_x)
        << ", y = " << format_point(r.dissipativity_witness_y) << ". ";
  r.message = r.passed ? "all declared bounds hold on the sample" : msg.str();
  return r;
}

}  // namespace htem
