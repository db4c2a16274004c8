#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "htem/drift.hpp"
#include "htem/ledger.hpp"
#include "htem/schemes.hpp"

namespace htem {

inline constexpr int kSchemaVersion = 1;

/// Called with short human-readable progress lines; never part of outputs.
using ProgressFn = std::function<void(const std::string&)>;

/// Drift selection as in the JSON config:
/// {"kind": "ou"|"sine"|"tanh", "theta": ..., "a": ..., "dim": ...}.
struct DriftSpec {
  std::string kind = "ou";
  double theta = 1.0;
  double a = 0.5;
  std::size_t dim = 1;
};
DriftModel make_drift(const DriftSpec& spec);

/// n draws of the standard symmetric stable (kind "stable", times `scale`)
/// or symmetric Pareto (kind "pareto") law. Draw i comes from the stream
/// (seed, i / 4096), so the output does not depend on the worker count.
std::vector<double> sample_draws(const std::string& kind, double alpha, double scale,
                                 std::size_t n, std::uint64_t seed);

/// Ledger request: {"alpha", "drift": {...}, "eta", "x0", "C2_user"}, with an
/// optional "schema_version": 1. Unknown keys are rejected.
struct ConstantsRequest {
  DriftSpec drift;
  double alpha = 1.5;
  double eta = 0.01;
  std::vector<double> x0;  // empty: the origin
  std::optional<double> C2_user;

  static ConstantsRequest from_json(const std::string& text);
  ConstantLedger evaluate() const;
};

// ---------------------------------------------------------------------------
// Convergence studies

enum class ReferenceChoice { Auto, ExactOU, FineGrid };

struct ConvergenceStudy {
  /// Descending stepsizes; each must pass the stepsize gate.
  std::vector<double> eta_grid = default_grid();
  Scheme scheme = Scheme::StableEM;
  DriftSpec drift;
  double alpha = 1.5;
  /// Target horizon; N = round(T / eta) and the horizon actually used is
  /// N eta. Zero selects min(max(10, 5 / C5), 20).
  double horizon_T = 0.0;
  std::size_t n_traj = 200000;
  std::size_t repeats = 16;
  std::uint64_t seed = 1;
  /// Auto: exact OU transitions for the OU drift, else the fine grid.
  ReferenceChoice reference = ReferenceChoice::Auto;
  std::size_t refine = 16;
  std::vector<double> x0{0.0};
  /// C2 used for the Pareto-scheme bound; defaults to kDefaultC2.
  std::optional<double> C2_user;

  /// Parses a schema_version 1 config. Throws ConfigInvalid.
  static ConvergenceStudy from_json(const std::string& text);
  std::string to_json() const;
  /// The default grid 2^-4, ..., 2^-9.
  static std::vector<double> default_grid();
};

struct EtaRow {
  double eta = 0.0;
  std::size_t n_steps = 0;
  double horizon = 0.0;
  std::vector<double> w1_repeats;
  double w1_median = 0.0;
  double w1_iqr = 0.0;
  /// Standard error of the median: 1.2533 (IQR / 1.349) / sqrt(R).
  double mc_error = 0.0;
  /// Theorem bound at this eta: script_C eta or script_C_prime eta^(2/alpha - 1).
  double bound = 0.0;
  bool bound_ok = false;
};

struct RateFit {
  /// Least squares of log2 W1 median on log2 eta; NaN with a single eta.
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_std_error = 0.0;
  double theory_slope = 0.0;
  std::vector<EtaRow> per_eta;
  std::string reference;      // "exact_ou" or "fine_grid"
  bool dominance_ok = false;  // every row within its bound
  bool monotone_ok = false;   // at most one inversion, inside IQR overlap
  std::vector<std::string> warnings;
  ConvergenceStudy study;

  /// eta,w1_median,w1_iqr,n_traj,repeats
  std::string csv() const;
  std::string to_json() const;
};

inline constexpr const char* kWarnInsufficientTrajectories = "InsufficientTrajectories";

/// For every eta and repeat r, simulates the scheme and its coupled
/// reference with seed derive_seed(seed, r) and takes the exact 1-d W1 (the
/// sliced surrogate with 64 directions when d > 1). Throws
/// TrajectoryDiverged or ConfigInvalid.
RateFit run_convergence(const ConvergenceStudy& study, const ProgressFn& progress = {});

/// Least-squares fit of log2 y on log2 x.
struct LogFit {
  double slope, intercept, r_squared, slope_std_error;
};
LogFit fit_log2(const std::vector<double>& x, const std::vector<double>& y);

// ---------------------------------------------------------------------------
// Exact OU analysis

struct OuOracleReport {
  double alpha = 0.0;
  double eta = 0.0;
  /// stationary_scale_Y - stationary_scale_X.
  double P_exact = 0.0;
  double stationary_scale_X = 0.0;  // (1/alpha)^(1/alpha)
  double stationary_scale_Y = 0.0;  // (eta / (1 - (1-eta)^alpha))^(1/alpha)
  /// (1/alpha)^(1/alpha) (alpha - 1) / (2 alpha): the limit of P / eta.
  double first_order_coeff = 0.0;
  /// (1/alpha)^(1/alpha) (alpha + 1) / (2 alpha), the coefficient of the
  /// printed expansion; kept for comparison (see README).
  double printed_first_order_coeff = 0.0;
  double P_over_eta = 0.0;

  std::string to_json() const;
};

/// Closed form, accurate to a few ulps of P even when P << 1.
OuOracleReport ou_oracle(double alpha, double eta);

struct OuInvariantReport {
  double alpha = 0.0, eta = 0.0;
  std::size_t n = 0;
  double P = 0.0;
  double E_abs_xi = 0.0;       // closed form
  double E_abs_xi_mom = 0.0;   // median of means over the draws
  double E_abs_xi_mom_se = 0.0;
  double bound = 0.0;          // |P| E|xi|
  double w1_independent = 0.0;
  double w1_independent_se = 0.0;
  /// w1_independent <= bound + 3 se. Rarely true at desk-scale n: two
  /// independent heavy-tailed samples are further apart than bound.
  bool independent_ok = false;
  double w1_coupled = 0.0;      // same draws, two scales
  double coupled_ratio = 0.0;   // w1_coupled / bound
  bool coupled_ok = false;      // w1_coupled = |P| mean|xi| to rounding

  std::string to_json() const;
};

/// Draws the two stationary laws directly (stable with the two scales) and
/// compares their W1 with |P| E|xi|, once from independent and once from
/// shared draws.
OuInvariantReport ou_invariant_w1_check(double alpha, double eta, std::size_t n_traj,
                                        std::uint64_t seed);

// ---------------------------------------------------------------------------
// Ergodicity audit

struct AuditConfig {
  Scheme scheme = Scheme::StableEM;
  DriftSpec drift;
  double alpha = 1.5;
  double eta = 0.01;
  std::vector<std::size_t> checkpoints{10, 100, 1000};
  /// Starting points for the moment bounds (default 0 and 2 e1).
  std::vector<std::vector<double>> starts;
  /// The two starts whose laws must merge (default 0 and 4 e1).
  std::vector<double> mix_x, mix_y;
  std::size_t n_traj = 20000;
  std::uint64_t seed = 7;
  std::size_t refine = 16;
  std::size_t mom_blocks = 32;
  /// Also check the continuous process against C3(1).
  bool reference_moments = true;

  static AuditConfig from_json(const std::string& text);
  std::string to_json() const;
  /// Fills empty starts and mixing points with the defaults for `dim`.
  void complete_defaults();
};

struct MomentCheck {
  std::string bound_name;  // "C3", "C4" or "C7"
  std::vector<double> x0;
  std::size_t k = 0;
  double t = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
  double margin = 0.0;  // bound - (estimate + 3 std_error)
  bool ok = false;
};

struct MixingCheck {
  std::size_t k = 0;
  double w1 = 0.0;
  double std_error = 0.0;
};

/// W1 from two starts against decay_factor e^(-C5 t) |x - y|. Reported for
/// information only; see README.
struct ContractionCheck {
  std::size_t k = 0;
  double t = 0.0;
  double w1 = 0.0;
  double bound = 0.0;
  bool holds = false;
};

struct AuditReport {
  AuditConfig config;
  std::vector<MomentCheck> moments;
  std::vector<MixingCheck> mixing;
  std::vector<ContractionCheck> contraction;
  bool moments_ok = false;
  bool mixing_ok = false;
  bool passed = false;
  std::vector<std::string> warnings;

  std::string to_json() const;
};

/// Simulates to every checkpoint from every start and checks the uniform
/// moment bounds (C4 for the stable chain, C7 for the Pareto chain, C3 for
/// the continuous process) plus merging of the laws from two starts.
/// Violations are recorded, not thrown; see require_audit_passed.
AuditReport run_ergodicity_audit(const AuditConfig& config, const ProgressFn& progress = {});

/// Throws BoundViolated naming the first failing checkpoint and its margin.
void require_audit_passed(const AuditReport& report);

}  // namespace htem
