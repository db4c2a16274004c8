#include "htem/ledger.hpp"

#include <cmath>
#include <json.hpp>
#include <limits>

#include "htem/error.hpp"
#include "htem/schemes.hpp"

namespace htem {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_alpha(double alpha) {
  require(alpha > 1.0 && alpha < 2.0, ErrorCode::Domain, "alpha must lie in (1, 2)");
}

void check_drift(const DriftParams& p) {
  require(p.theta1 > 0.0 && p.theta4 > 0.0 && p.theta2 >= 0.0 && p.theta3 >= 0.0 &&
              p.K >= 0.0 && p.b0_norm >= 0.0,
          ErrorCode::Domain, "drift constants need theta1, theta4 > 0 and the rest >= 0");
}

void check_lambda(double lambda, double alpha) {
  require(lambda >= 1.0 && lambda < alpha, ErrorCode::LambdaOutOfRange,
          "lambda must lie in [1, alpha)");
}

double norm2(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

void add_warning(std::vector<std::string>& w, const std::string& tag) {
  for (const auto& s : w)
    if (s == tag) return;
  w.push_back(tag);
}

}  // namespace

double levy_abs_moment(double alpha, std::size_t dim, double p) {
  check_alpha(alpha);
  require(p >= 0.0 && p < alpha, ErrorCode::MomentUndefined,
          "E|L_1|^p is finite only for p < alpha");
  if (p == 0.0) return 1.0;
  const double one = stable_abs_moment(alpha, p);
  if (dim == 1) return one;
  return std::pow(static_cast<double>(dim), std::max(p, 1.0)) * one;
}

double coupling_kappa(double theta1, double alpha, double p_alpha) {
  return std::pow(theta1 * (2.0 - alpha) / (4.0 * p_alpha), 1.0 / (alpha - 1.0));
}

double compute_c1(double theta1, double theta4, double K, double alpha, double p_alpha) {
  check_alpha(alpha);
  require(theta1 > 0.0 && theta4 > 0.0 && K >= 0.0, ErrorCode::Domain,
          "c1 needs theta1, theta4 > 0 and K >= 0");
  if (K == 0.0) return 0.0;
  const double inner = theta1 * (2.0 - alpha) / (4.0 * p_alpha) *
                       std::pow(theta4 / (2.0 * K), (1.0 - alpha) / 2.0) *
                       std::exp(-2.0 * std::sqrt(2.0 * K / theta4));
  return std::pow(inner, 1.0 / (alpha - 1.0));
}

double compute_C5(double theta1, double theta4, double K, double c1, double kappa) {
  require(theta1 > 0.0 && theta4 > 0.0 && K >= 0.0 && c1 >= 0.0, ErrorCode::Domain,
          "C5 needs theta1, theta4 > 0 and K, c1 >= 0");
  if (K == 0.0) {
    // K -> 0: the second and third entries behave like L0^(theta4 - 2).
    if (theta4 < 2.0) return 2.0 * theta1;
    if (theta4 == 2.0) return std::min({2.0 * theta1, 1.0, 21.0 * kappa * theta4 / 160.0});
    return 0.0;
  }
  const double L0 = std::sqrt(2.0 * K / theta4);
  const double lead = std::exp(-2.0 * c1 * L0);
  const double grow = std::pow(2.0 * K / theta4, theta4 / 2.0 - 1.0);
  const double t2 = theta4 / 2.0 * grow;
  const double t3 = c1 / (8.0 * std::sqrt(2.0)) * (lead / 20.0 + 1.0) *
                    std::pow(theta4, 1.5) / std::sqrt(K) * grow;
  // The printed constant carries a minus sign; the decay rate is its magnitude.
  return std::abs(-lead * std::min({2.0 * theta1, t2, t3}));
}

Coupling compute_coupling(const DriftParams& params, double alpha, double p_alpha) {
  check_alpha(alpha);
  check_drift(params);
  Coupling c;
  const double th1 = params.theta1, th4 = params.theta4, K = params.K;
  c.L0 = std::sqrt(2.0 * K / th4);
  c.kappa = coupling_kappa(th1, alpha, p_alpha);
  c.c1 = compute_c1(th1, th4, K, alpha, p_alpha);
  c.C5 = compute_C5(th1, th4, K, c.c1, c.kappa);
  add_warning(c.warnings, kWarnC5Magnitude);
  if (K == 0.0) {
    add_warning(c.warnings, kWarnDegenerateK);
    c.decay_factor = 2.0 * c.c1;  // limit of 2 (1 - e^(-c1 L0)) / L0, and c1 = 0
    if (th4 <= 2.0) {
      c.decay_ratio = 0.0;
    } else {
      // decay_factor / C5 ~ 2 kappa L0^(3 - theta4) / m as L0 -> 0.
      const double m = std::min(th4 / 2.0, 21.0 * c.kappa * th4 / 160.0);
      if (th4 < 3.0) {
        c.decay_ratio = 0.0;
      } else if (th4 == 3.0) {
        c.decay_ratio = 2.0 * c.kappa / m;
      } else {
        c.decay_ratio = kInf;
        add_warning(c.warnings, kWarnDecayRatioInfinite);
      }
    }
    return c;
  }
  c.decay_factor = -2.0 * std::expm1(-c.c1 * c.L0) / c.L0;
  c.decay_ratio = c.C5 > 0.0 ? c.decay_factor / c.C5 : kInf;
  if (!std::isfinite(c.decay_ratio)) add_warning(c.warnings, kWarnDecayRatioInfinite);
  return c;
}

double compute_C3(double lambda, double theta4, double K, double b0_norm, std::size_t dim,
                  double alpha, double p_alpha) {
  check_alpha(alpha);
  check_lambda(lambda, alpha);
  require(theta4 > 0.0 && K >= 0.0 && b0_norm >= 0.0 && dim >= 1, ErrorCode::Domain,
          "C3 needs theta4 > 0, K >= 0, |b(0)| >= 0, d >= 1");
  const double sd = std::sqrt(static_cast<double>(dim));
  const double inner = lambda * (theta4 + K) + std::pow(theta4, 1.0 - lambda) * std::pow(b0_norm, lambda) +
                       2.0 * p_alpha * lambda * (3.0 - lambda) * sd / (2.0 * (2.0 - alpha)) +
                       2.0 * p_alpha * lambda / (alpha - lambda) +
                       std::pow(theta4 / 4.0, 1.0 - lambda) *
                           std::pow(2.0 * p_alpha / (alpha - 1.0), lambda);
  return 2.0 / theta4 * inner + 1.0;
}

double compute_C4(double lambda, double eta, const DriftParams& params, std::size_t dim,
                  double alpha, double p_alpha) {
  check_alpha(alpha);
  check_lambda(lambda, alpha);
  check_drift(params);
  require(eta > 0.0 && dim >= 1, ErrorCode::Domain, "C4 needs eta > 0 and d >= 1");
  const double th1 = params.theta1, th4 = params.theta4, K = params.K;
  const double b0 = params.b0_norm, b2 = b0 * b0;
  const double sd = std::sqrt(static_cast<double>(dim));
  const double moment = levy_abs_moment(alpha, dim, lambda - 1.0);
  // |b(0)|^(lambda-1) is 1 at lambda = 1 even when b(0) = 0.
  const double bracket =
      th4 * lambda / 2.0 * (eta * 2.0 * b2 / th4 + 2.0 * eta * eta * b2 + 1.0 + 2.0 * eta * K) +
      lambda * b2 / th4 + 2.0 * lambda * eta * b2 + lambda * K +
      2.0 * lambda * p_alpha *
          ((3.0 - alpha) * sd / (2.0 * (2.0 - alpha)) + 1.0 / (alpha - lambda) +
           std::pow(b0, lambda - 1.0) + moment / (alpha - 1.0)) +
      std::pow(2.0 * p_alpha * (1.0 + std::pow(th1, lambda - 1.0)) / (alpha - 1.0), lambda) *
          std::pow(2.0 / th4, lambda - 1.0);
  return 1.0 + 2.0 / th4 * bracket;
}

double compute_C7(double eta, const DriftParams& params, std::size_t dim, double alpha,
                  double sigma) {
  check_alpha(alpha);
  check_drift(params);
  require(eta > 0.0 && sigma > 0.0 && dim >= 1, ErrorCode::Domain,
          "C7 needs eta > 0, sigma > 0, d >= 1");
  const double th4 = params.theta4, K = params.K, b2 = params.b0_norm * params.b0_norm;
  const double d = static_cast<double>(dim);
  return d * alpha / sigma * (1.0 / ((2.0 - alpha) * sigma) + 1.0 / (alpha - 1.0)) +
         th4 / 2.0 * (eta * 2.0 * b2 / th4 + 2.0 * eta * eta * b2 + 1.0 + 2.0 * eta * K) +
         b2 / th4 + 2.0 * eta * b2 + K;
}

namespace {

void check_inputs(const LedgerInputs& in) {
  check_alpha(in.alpha);
  check_drift(in.drift);
  require(in.dim >= 1, ErrorCode::Domain, "dimension must be positive");
  require(in.x0.size() == in.dim, ErrorCode::DimensionMismatch,
          "x0 dimension differs from the ledger dimension");
  require(in.eta > 0.0, ErrorCode::Domain, "eta must be positive");
  require(in.frac_lapl_b0 >= 0.0 && std::isfinite(in.frac_lapl_b0), ErrorCode::Domain,
          "|Delta^{alpha/2} b(0)| must be finite and >= 0");
}

}  // namespace

ScriptCBreakdown compute_script_C(const LedgerInputs& in) {
  check_inputs(in);
  const StableSpec spec(in.alpha, in.dim);
  const double p = spec.p_alpha(), a = in.alpha, d = static_cast<double>(in.dim);
  const Coupling c = compute_coupling(in.drift, a, p);
  ScriptCBreakdown r;
  r.prefactor = 1.0 + c.decay_ratio;
  r.theta_factor = in.drift.theta1 * in.drift.theta1 +
                   4.0 * d * in.drift.theta2 * p / ((2.0 - a) * (a - 1.0));
  r.moment_factor = compute_C3(1.0, in.drift.theta4, in.drift.K, in.drift.b0_norm, in.dim, a, p) *
                    compute_C4(1.0, in.eta, in.drift, in.dim, a, p) *
                    std::sqrt(1.0 + norm2(in.x0));
  r.frac_lapl_b0 = in.frac_lapl_b0;
  r.value = r.prefactor * (r.theta_factor * r.moment_factor + r.frac_lapl_b0);
  return r;
}

ScriptCPrimeBreakdown compute_script_C_prime(const LedgerInputs& in) {
  check_inputs(in);
  require(in.C2_user.has_value(), ErrorCode::MissingC2,
          "C2 has no closed form and must be supplied");
  require(*in.C2_user >= 0.0 && std::isfinite(*in.C2_user), ErrorCode::Domain,
          "C2 must be finite and >= 0");
  const StableSpec spec(in.alpha, in.dim);
  const double p = spec.p_alpha(), s = spec.sigma(), a = in.alpha;
  const double d = static_cast<double>(in.dim);
  const double th1 = in.drift.theta1, th4 = in.drift.theta4;
  const Coupling c = compute_coupling(in.drift, a, p);
  const double C3 = compute_C3(1.0, th4, in.drift.K, in.drift.b0_norm, in.dim, a, p);
  const double C7 = compute_C7(in.eta, in.drift, in.dim, a, s);
  ScriptCPrimeBreakdown r;
  r.C2 = *in.C2_user;
  r.drift_term = 2.0 * th1 / (1.0 + 1.0 / a) *
                 (th1 * C3 * (std::sqrt(1.0 + norm2(in.x0)) + 2.0 * C7 / th4) +
                  levy_abs_moment(a, in.dim, 1.0));
  r.noise_term = d * p / std::pow(s, a) +
                 2.0 * d * a * p * levy_abs_moment(a, in.dim, 2.0 - a) / ((2.0 - a) * (a - 1.0));
  r.bracket = c.decay_ratio + r.C2 * (c.decay_ratio + 1.0);
  r.value = (r.drift_term + r.noise_term) * r.bracket + r.drift_term;
  return r;
}

ConstantLedger build_ledger(const LedgerInputs& in_raw) {
  ConstantLedger L;
  L.inputs = in_raw;
  if (!L.inputs.C2_user) {
    L.inputs.C2_user = kDefaultC2;
    add_warning(L.warnings, kWarnC2Default);
  }
  const LedgerInputs& in = L.inputs;
  check_inputs(in);
  const StableSpec spec(in.alpha, in.dim);
  L.p_alpha = spec.p_alpha();
  L.sigma = spec.sigma();
  L.coupling = compute_coupling(in.drift, in.alpha, L.p_alpha);
  for (const auto& w : L.coupling.warnings) add_warning(L.warnings, w);
  L.C3_1 = compute_C3(1.0, in.drift.theta4, in.drift.K, in.drift.b0_norm, in.dim, in.alpha,
                      L.p_alpha);
  L.C4_1 = compute_C4(1.0, in.eta, in.drift, in.dim, in.alpha, L.p_alpha);
  L.C7 = compute_C7(in.eta, in.drift, in.dim, in.alpha, L.sigma);
  L.E_abs_L1 = levy_abs_moment(in.alpha, in.dim, 1.0);
  L.E_abs_L1_pow_2_minus_alpha = levy_abs_moment(in.alpha, in.dim, 2.0 - in.alpha);
  L.E_abs_L1_pow_lambda_minus_1 = levy_abs_moment(in.alpha, in.dim, 0.0);
  L.script_C = compute_script_C(in);
  L.script_C_prime = compute_script_C_prime(in);
  L.stepsize_gate_ok = stepsize_gate(in.drift, in.eta);
  if (!L.stepsize_gate_ok) add_warning(L.warnings, kWarnStepsizeGate);
  return L;
}

ConstantLedger build_ledger(const DriftModel& model, const StableSpec& spec,
                            const std::vector<double>& x0, double eta,
                            std::optional<double> C2_user, const FracLaplConfig& cfg) {
  LedgerInputs in;
  in.drift_name = model.name();
  in.alpha = spec.alpha();
  in.dim = spec.dim();
  in.drift = model.params();
  in.x0 = x0;
  in.eta = eta;
  in.C2_user = C2_user;
  in.frac_lapl_b0 = frac_laplacian_drift_at_zero(model, spec, cfg).value;
  return build_ledger(in);
}

std::string ConstantLedger::to_json() const {
  using nlohmann::ordered_json;
  ordered_json j;
  ordered_json& ij = j["inputs"];
  if (!inputs.drift_name.empty()) ij["drift"] = inputs.drift_name;
  ij["alpha"] = inputs.alpha;
  ij["dim"] = inputs.dim;
  ij["theta1"] = inputs.drift.theta1;
  ij["theta2"] = inputs.drift.theta2;
  ij["theta3"] = inputs.drift.theta3;
  ij["theta4"] = inputs.drift.theta4;
  ij["K"] = inputs.drift.K;
  ij["b0_norm"] = inputs.drift.b0_norm;
  ij["x0"] = inputs.x0;
  ij["eta"] = inputs.eta;
  ij["C2_user"] = inputs.C2_user.value_or(kDefaultC2);
  ordered_json& v = j["values"];
  v["p_alpha"] = p_alpha;
  v["sigma"] = sigma;
  v["L0"] = coupling.L0;
  v["c1"] = coupling.c1;
  v["C5"] = coupling.C5;
  v["decay_factor"] = coupling.decay_factor;
  v["decay_ratio"] = coupling.decay_ratio;
  v["C3_1"] = C3_1;
  v["C4_1"] = C4_1;
  v["C7"] = C7;
  v["E_abs_L1"] = E_abs_L1;
  v["E_abs_L1_pow_2_minus_alpha"] = E_abs_L1_pow_2_minus_alpha;
  v["E_abs_L1_pow_lambda_minus_1"] = E_abs_L1_pow_lambda_minus_1;
  v["frac_lapl_b0"] = inputs.frac_lapl_b0;
  v["script_C"] = script_C.value;
  v["script_C_prime"] = script_C_prime.value;
  j["stepsize_gate_ok"] = stepsize_gate_ok;
  j["warnings"] = warnings;
  return j.dump(2);
}

}  // namespace htem
