#pragma once

#include <functional>
#include <optional>
#include <span>

#include "htem/drift.hpp"
#include "htem/stable.hpp"

namespace htem {

struct FracLaplConfig {
  /// Nodes per region on the base resolution (16-point Gauss-Legendre panels).
  int inner_quad_points = 512;
  /// Below this radius the symmetric difference is replaced by its Taylor
  /// expansion f'' z^2 + f'''' z^4 / 12.
  double eps_cutoff = 0.02;
  /// The outer integral is truncated here; the remainder is bounded.
  double tail_cutoff = 1e4;
  /// Step of the finite-difference stencils for f'' and f''''.
  double fd_step = 1e-2;
  /// Outer panels are at most this wide so oscillating f are resolved.
  double max_tail_panel = 1.0;
  /// Resolution doubles until the quadrature part of the error estimate
  /// drops below this.
  double target_error = 1e-5;
  int max_doublings = 3;
};

/// Growth information about f needed to bound the truncated tail.
struct TailBound {
  /// |f(x) - f(y)| <= lipschitz |x - y|.
  std::optional<double> lipschitz;
  /// |f(x + z e_i) + f(x - z e_i) - 2 f(x)| <= second_difference for all z.
  std::optional<double> second_difference;
};

struct FracLaplResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int doublings = 0;
};

using ScalarField = std::function<double(std::span<const double>)>;

/// Componentwise fractional Laplacian
///   sum_i p_alpha * integral (f(x + z e_i) - f(x) - z d_i f(x) 1{|z|<=1}) |z|^(-1-alpha) dz,
/// evaluated in the symmetrised form over z > 0. Throws TailBoundUnavailable
/// when `tail` carries neither bound.
FracLaplResult frac_laplacian(const ScalarField& f, std::span<const double> x,
                              const StableSpec& spec, const FracLaplConfig& cfg,
                              const TailBound& tail);

/// 1-d convenience overload.
FracLaplResult frac_laplacian_1d(const std::function<double(double)>& f, double x,
                                 const StableSpec& spec, const FracLaplConfig& cfg,
                                 const TailBound& tail);

/// Euclidean norm over output components j of Delta^{alpha/2} b_j(0). The
/// error estimate is the sum of the component estimates.
FracLaplResult frac_laplacian_drift_at_zero(const DriftModel& model, const StableSpec& spec,
                                            const FracLaplConfig& cfg = {});

}  // namespace htem
