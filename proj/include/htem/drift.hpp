#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace htem {

/// Regularity and dissipativity constants of a drift:
///   |grad b| <= theta1, |grad^2 b| <= theta2, |grad^3 b| <= theta3,
///   <b(x) - b(y), x - y> <= -theta4 |x - y|^2 + K.
struct DriftParams {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double theta3 = 0.0;
  double theta4 = 0.0;
  double K = 0.0;
  double b0_norm = 0.0;
};

enum class DriftKind { OU, Sine, Tanh, Custom };

const char* drift_kind_name(DriftKind kind);

/// A drift b: R^d -> R^d with declared constants. Immutable once built.
class DriftModel {
 public:
  using Function = std::function<void(std::span<const double> x, std::span<double> out)>;

  /// b(x) = -theta x.
  static DriftModel ou(double theta, std::size_t dim);
  /// b_i(x) = -x_i + a sin(x_i), 0 < a < 1.
  static DriftModel sine_perturbed(double a, std::size_t dim);
  /// b_i(x) = -x_i + 2 tanh(x_i): contracts only outside a ball.
  static DriftModel tanh_distant(std::size_t dim);
  /// A user drift with declared constants. Certified on construction with
  /// `samples` points in the ball of radius `radius`; throws BoundViolated
  /// (with the witness in the message) when a declared bound fails.
  /// `second_difference_bound`, if known, bounds
  /// |b_j(x + z e_i) + b_j(x - z e_i) - 2 b_j(x)| over all x, z, i, j.
  static DriftModel custom(std::string name, std::size_t dim, Function fn,
                           DriftParams declared,
                           std::optional<double> second_difference_bound = std::nullopt,
                           std::size_t samples = 10000, double radius = 50.0,
                           std::uint64_t seed = 1);

  /// Same drift with other declared constants; used for negative controls.
  DriftModel with_params(const DriftParams& params) const;

  DriftKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  std::size_t dim() const noexcept { return dim_; }
  const DriftParams& params() const noexcept { return params_; }
  /// Parameter of the family: theta for OU, a for sine, 0 otherwise.
  double family_parameter() const noexcept { return family_param_; }
  /// True when b_i depends on x_i only.
  bool separable() const noexcept { return kind_ != DriftKind::Custom; }
  std::optional<double> second_difference_bound() const noexcept { return second_diff_; }

  /// out = b(x). No allocation for the shipped families.
  void eval(std::span<const double> x, std::span<double> out) const;
  std::vector<double> operator()(const std::vector<double>& x) const;

  /// Scalar component map for separable drifts: b_i(x) = phi(x_i).
  double phi(double v) const;

  /// L0 = sqrt(2K / theta4), the radius beyond which b contracts.
  double L0() const;

 private:
  DriftModel() = default;

  DriftKind kind_ = DriftKind::OU;
  std::string name_;
  std::size_t dim_ = 1;
  DriftParams params_;
  double family_param_ = 0.0;
  std::optional<double> second_diff_;
  Function fn_;
};

/// Outcome of a Monte Carlo check of the declared constants.
struct CertificationReport {
  bool passed = true;
  std::size_t samples = 0;
  double radius = 0.0;
  /// Largest finite-difference Jacobian operator norm seen, and where.
  double max_jacobian_norm = 0.0;
  std::vector<double> jacobian_witness;
  /// Largest <b(x)-b(y), x-y> + theta4 |x-y|^2 - K seen (<= 0 when the
  /// dissipativity bound holds), and the pair attaining it.
  double worst_dissipativity_slack = -HUGE_VAL;
  std::vector<double> dissipativity_witness_x;
  std::vector<double> dissipativity_witness_y;
  bool jacobian_ok = true;
  bool dissipativity_ok = true;
  std::string message;
};

/// Samples points uniformly in the ball of the given radius and checks the
/// Jacobian bound and the dissipativity inequality at tolerance 1e-6.
CertificationReport certify(const DriftModel& model, std::size_t samples, double radius,
                            std::uint64_t seed);

/// Spectral norm of the central-difference Jacobian of b at x.
double jacobian_norm_fd(const DriftModel& model, std::span<const double> x);

}  // namespace htem
