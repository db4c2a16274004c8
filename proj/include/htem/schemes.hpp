#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "htem/drift.hpp"
#include "htem/rng.hpp"
#include "htem/stable.hpp"

namespace htem {

enum class Scheme { StableEM, ParetoEM, ExactOU };

const char* scheme_name(Scheme scheme);
Scheme parse_scheme(const std::string& name);

struct SchemeConfig {
  double eta = 0.01;
  std::size_t n_steps = 0;
  Scheme scheme = Scheme::StableEM;
  std::vector<double> x0{0.0};
  std::uint64_t seed = 0;
  std::size_t n_traj = 1;
  /// Keep every intermediate state (debugging aid; memory n_traj*(N+1)*d).
  bool keep_paths = false;
};

/// eta <= min{1, theta4 / (8 theta1^2), 1 / theta4}: the stepsize hypothesis
/// under which the rate theorems hold.
bool stepsize_gate(const DriftParams& params, double eta);
double stepsize_gate_limit(const DriftParams& params);

/// Terminal states of n_traj trajectories, row-major n_traj x dim.
struct TrajectoryEnsemble {
  std::size_t n_traj = 0;
  std::size_t dim = 0;
  std::vector<double> terminal;
  SchemeConfig config;
  bool stepsize_gate_ok = false;
  double wall_time = 0.0;  // seconds; never written to outputs
  /// With keep_paths: n_traj x (N+1) x dim, trajectory-major.
  std::vector<double> paths;

  std::vector<double> column(std::size_t j) const;
};

/// y + eta b(y) + xi; xi is a stable increment with scale eta^(1/alpha).
/// Throws TrajectoryDiverged (tagged with `step`) on a non-finite result.
std::vector<double> step_stable(const std::vector<double>& y, const DriftModel& model,
                                double eta, const std::vector<double>& xi,
                                std::size_t step = 0);

/// u + eta b(u) + (eta^(1/alpha) / sigma) zeta.
std::vector<double> step_pareto(const std::vector<double>& u, const DriftModel& model,
                                double eta, const std::vector<double>& zeta,
                                const StableSpec& spec, std::size_t step = 0);

/// ((1 - exp(-alpha theta t)) / (alpha theta))^(1/alpha): the scale of the
/// stable part of the OU transition over time t.
double ou_transition_scale(double alpha, double theta, double t);

/// Exact OU transition over time t from x: exp(-theta t) x plus i.i.d.
/// stable components of scale ou_transition_scale(alpha, theta, t).
std::vector<double> exact_ou_step(const std::vector<double>& x, double theta, double t,
                                  const StableSpec& spec, RngStream& stream);

/// n_traj trajectories, trajectory i driven by RngStream(seed, i). Output
/// is bit-identical for any worker count. ExactOU needs an OU drift and
/// takes exact transitions of length eta, drawing the same raw stable
/// variates as StableEM with the same seed.
TrajectoryEnsemble simulate_ensemble(const SchemeConfig& config, const DriftModel& model,
                                     const StableSpec& spec);

/// How the reference law Law(X_{eta N}) is realised next to a scheme.
enum class ReferenceKind {
  ExactOU,   // exact OU transitions of length eta (OU drift only)
  FineGrid,  // StableEM with step eta / refine
};

/// A scheme ensemble together with a reference ensemble driven by the same
/// randomness, so that the two are coupled trajectory by trajectory:
///  - StableEM / ExactOU: one stable variate per step and component feeds
///    both chains.
///  - ParetoEM / ExactOU: the Pareto variate and the stable variate share
///    their tail probability and sign.
///  - StableEM / FineGrid: the coarse increment is the rescaled sum of the
///    `refine` fine increments (exactly stable).
///  - ParetoEM / FineGrid: the Pareto variate is the one whose tail
///    probability equals that of the summed fine increments.
/// The scheme ensemble of the first two pairings is bit-identical to
/// simulate_ensemble with the same seed.
struct CoupledEnsembles {
  TrajectoryEnsemble scheme;
  TrajectoryEnsemble reference;
};

CoupledEnsembles simulate_coupled(const SchemeConfig& config, ReferenceKind reference,
                                  std::size_t refine, const DriftModel& model,
                                  const StableSpec& spec, const StableLaw* law = nullptr);

/// CSV with header x0,...,x{d-1}, one row per trajectory, %.17g values.
void write_ensemble_csv(const TrajectoryEnsemble& ensemble, const std::string& path);
std::string ensemble_csv(const TrajectoryEnsemble& ensemble);

/// "HTEM1", u64 rows, u64 cols, then little-endian f64 row-major.
void write_ensemble_binary(const TrajectoryEnsemble& ensemble, const std::string& path);
/// Reads a binary ensemble back; only n_traj, dim and terminal are filled.
TrajectoryEnsemble read_ensemble_binary(const std::string& path);
TrajectoryEnsemble read_ensemble_csv(const std::string& path);

}  // namespace htem
