#pragma once

#include <optional>
#include <string>
#include <vector>

#include "htem/drift.hpp"
#include "htem/fraclap.hpp"
#include "htem/stable.hpp"

namespace htem {

/// Default for the semigroup-gradient constant C2, which has no closed form.
inline constexpr double kDefaultC2 = 10.0;

/// Warning tags attached to a ledger.
inline constexpr const char* kWarnDegenerateK = "DegenerateK";
inline constexpr const char* kWarnC5Magnitude = "C5Magnitude";
inline constexpr const char* kWarnC2Default = "C2Default";
inline constexpr const char* kWarnStepsizeGate = "StepsizeGate";
inline constexpr const char* kWarnDecayRatioInfinite = "DecayRatioInfinite";

/// E|L_1|^p for L_1 with d i.i.d. standard symmetric stable components and
/// |.| the Euclidean norm. Exact for d = 1 and for p = 0; for d > 1 the bound
/// d^max(p,1) E|S|^p (subadditivity of |.|^p, p <= 1, and convexity, p > 1).
/// Throws MomentUndefined unless 0 <= p < alpha.
double levy_abs_moment(double alpha, std::size_t dim, double p);

/// ((theta1 (2-alpha) / (4 p_alpha)) (theta4 / 2K)^((1-alpha)/2) e^(-2 L0))^(1/(alpha-1)).
/// At K = 0 the value is the limit 0.
double compute_c1(double theta1, double theta4, double K, double alpha, double p_alpha);

/// (theta1 (2-alpha) / (4 p_alpha))^(1/(alpha-1)): c1 = kappa L0 e^(-2 L0 / (alpha-1)).
double coupling_kappa(double theta1, double alpha, double p_alpha);

/// |e^(-2 c1 L0) min{2 theta1, (theta4/2)(2K/theta4)^(theta4/2-1), third}|.
/// At K = 0 the min is taken in the limit K -> 0, which needs kappa when
/// theta4 >= 2.
double compute_C5(double theta1, double theta4, double K, double c1, double kappa = 0.0);

/// Prefactor and rate of the Wasserstein contraction
///   W1(Law X^x_t, Law X^y_t) <= decay_factor e^(-C5 t) |x - y|,
/// with decay_factor = 2 (1 - e^(-c1 L0)) / L0 (its limit 2 c1 at L0 = 0).
struct Coupling {
  double L0 = 0.0;
  double kappa = 0.0;
  double c1 = 0.0;
  double C5 = 0.0;
  double decay_factor = 0.0;
  /// decay_factor / C5, with its K -> 0 limit when both vanish.
  double decay_ratio = 0.0;
  std::vector<std::string> warnings;
};
Coupling compute_coupling(const DriftParams& params, double alpha, double p_alpha);

/// Moment constant of the continuous process, 1 <= lambda < alpha.
double compute_C3(double lambda, double theta4, double K, double b0_norm, std::size_t dim,
                  double alpha, double p_alpha);
/// Moment constant of the stable Euler chain, 1 <= lambda < alpha.
double compute_C4(double lambda, double eta, const DriftParams& params, std::size_t dim,
                  double alpha, double p_alpha);
/// Moment constant of the Pareto Euler chain.
double compute_C7(double eta, const DriftParams& params, std::size_t dim, double alpha,
                  double sigma);

struct LedgerInputs {
  std::string drift_name;  // informational only
  double alpha = 1.5;
  std::size_t dim = 1;
  DriftParams drift;
  std::vector<double> x0{0.0};
  double eta = 0.01;
  std::optional<double> C2_user;
  /// |Delta^{alpha/2} b(0)|.
  double frac_lapl_b0 = 0.0;
};

struct ScriptCBreakdown {
  double prefactor = 0.0;       // 1 + decay_ratio
  double theta_factor = 0.0;    // theta1^2 + 4 d theta2 p_alpha / ((2-alpha)(alpha-1))
  double moment_factor = 0.0;   // C3(1) C4(1) (1 + |x|^2)^(1/2)
  double frac_lapl_b0 = 0.0;
  double value = 0.0;
};

struct ScriptCPrimeBreakdown {
  double drift_term = 0.0;  // (2 theta1 / (1 + 1/alpha)) (theta1 C3(1) (...) + E|L_1|)
  double noise_term = 0.0;  // d p_alpha / sigma^alpha + 2 d alpha p_alpha E|L_1|^(2-alpha) / (...)
  double bracket = 0.0;     // decay_ratio + C2 (decay_ratio + 1)
  double C2 = 0.0;
  double value = 0.0;
};

/// Every constant of the rate theorems, evaluated once.
struct ConstantLedger {
  LedgerInputs inputs;
  double p_alpha = 0.0;
  double sigma = 0.0;
  Coupling coupling;
  double C3_1 = 0.0;
  double C4_1 = 0.0;
  double C7 = 0.0;
  double E_abs_L1 = 0.0;
  double E_abs_L1_pow_2_minus_alpha = 0.0;
  double E_abs_L1_pow_lambda_minus_1 = 1.0;  // at lambda = 1
  ScriptCBreakdown script_C;
  ScriptCPrimeBreakdown script_C_prime;
  bool stepsize_gate_ok = false;
  std::vector<std::string> warnings;

  /// {"inputs": {...}, "values": {...}, "warnings": [...]}.
  std::string to_json() const;
};

ScriptCBreakdown compute_script_C(const LedgerInputs& in);
/// Throws MissingC2 when in.C2_user is empty.
ScriptCPrimeBreakdown compute_script_C_prime(const LedgerInputs& in);

/// Pure evaluation from parameters. A missing C2 is replaced by kDefaultC2
/// with a C2Default warning.
ConstantLedger build_ledger(const LedgerInputs& in);

/// Ledger for a drift model; |Delta^{alpha/2} b(0)| is evaluated numerically.
ConstantLedger build_ledger(const DriftModel& model, const StableSpec& spec,
                            const std::vector<double>& x0, double eta,
                            std::optional<double> C2_user = std::nullopt,
                            const FracLaplConfig& cfg = {});

}  // namespace htem
