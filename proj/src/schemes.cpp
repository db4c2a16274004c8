#include "htem/schemes.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "htem/error.hpp"
#include "htem/parallel.hpp"

namespace htem {

namespace {

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

void check_config(const SchemeConfig& c, const DriftModel& model, const StableSpec& spec) {
  require(std::isfinite(c.eta) && c.eta >= 0.0 && c.eta <= 1.0, ErrorCode::ConfigInvalid,
          "eta must lie in [0, 1]");
  require(c.n_traj >= 1, ErrorCode::ConfigInvalid, "n_traj must be positive");
  require(c.x0.size() == model.dim() && model.dim() == spec.dim(),
          ErrorCode::DimensionMismatch, "x0, drift and noise dimensions differ");
  require(all_finite(c.x0), ErrorCode::ConfigInvalid, "x0 must be finite");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

TrajectoryEnsemble empty_ensemble(const SchemeConfig& c, const DriftModel& model) {
  TrajectoryEnsemble e;
  e.n_traj = c.n_traj;
  e.dim = model.dim();
  e.terminal.assign(c.n_traj * e.dim, 0.0);
  e.config = c;
  e.stepsize_gate_ok = stepsize_gate(model.params(), c.eta);
  return e;
}

// One Euler step y <- y + eta b(y) + noise, in place, using `drift` as scratch.
inline void euler_update(std::span<double> y, std::span<double> drift, const DriftModel& model,
                         double eta, std::span<const double> noise) {
  model.eval(y, drift);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = y[i] + eta * drift[i] + noise[i];
}

}  // namespace

const char* scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::StableEM: return "stable";
    case Scheme::ParetoEM: return "pareto";
    case Scheme::ExactOU: return "exact_ou";
  }
  return "unknown";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "stable" || name == "StableEM") return Scheme::StableEM;
  if (name == "pareto" || name == "ParetoEM") return Scheme::ParetoEM;
  if (name == "exact_ou" || name == "ExactOU") return Scheme::ExactOU;
  fail(ErrorCode::ConfigInvalid, "unknown scheme '" + name + "'");
}

double stepsize_gate_limit(const DriftParams& p) {
  double limit = 1.0;
  if (p.theta1 > 0.0) limit = std::min(limit, p.theta4 / (8.0 * p.theta1 * p.theta1));
  if (p.theta4 > 0.0) limit = std::min(limit, 1.0 / p.theta4);
  return limit;
}

bool stepsize_gate(const DriftParams& params, double eta) {
  return eta <= stepsize_gate_limit(params);
}

std::vector<double> TrajectoryEnsemble::column(std::size_t j) const {
  require(j < dim, ErrorCode::DimensionMismatch, "column index out of range");
  std::vector<double> out(n_traj);
  for (std::size_t i = 0; i < n_traj; ++i) out[i] = terminal[i * dim + j];
  return out;
}

std::vector<double> step_stable(const std::vector<double>& y, const DriftModel& model,
                                double eta, const std::vector<double>& xi, std::size_t step) {
  require(y.size() == model.dim() && xi.size() == y.size(), ErrorCode::DimensionMismatch,
          "step_stable dimension mismatch");
  std::vector<double> out = y, drift(y.size());
  euler_update(out, drift, model, eta, xi);
  if (!all_finite(out)) throw TrajectoryDiverged(0, step);
  return out;
}

std::vector<double> step_pareto(const std::vector<double>& u, const DriftModel& model,
                                double eta, const std::vector<double>& zeta,
                                const StableSpec& spec, std::size_t step) {
  require(u.size() == model.dim() && zeta.size() == u.size(), ErrorCode::DimensionMismatch,
          "step_pareto dimension mismatch");
  const double c = std::pow(eta, 1.0 / spec.alpha()) / spec.sigma();
  std::vector<double> noise(zeta.size()), out = u, drift(u.size());
  for (std::size_t i = 0; i < zeta.size(); ++i) noise[i] = c * zeta[i];
  euler_update(out, drift, model, eta, noise);
  if (!all_finite(out)) throw TrajectoryDiverged(0, step);
  return out;
}

double ou_transition_scale(double alpha, double theta, double t) {
  return std::pow(-std::expm1(-alpha * theta * t) / (alpha * theta), 1.0 / alpha);
}

std::vector<double> exact_ou_step(const std::vector<double>& x, double theta, double t,
                                  const StableSpec& spec, RngStream& stream) {
  require(theta > 0.0 && t > 0.0, ErrorCode::Domain, "exact_ou_step needs theta > 0, t > 0");
  require(x.size() == spec.dim(), ErrorCode::DimensionMismatch, "exact_ou_step dimension");
  const double decay = std::exp(-theta * t);
  const double scale = ou_transition_scale(spec.alpha(), theta, t);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = decay * x[i] + sample_stable_1d(stream, spec.alpha(), scale);
  return out;
}

TrajectoryEnsemble simulate_ensemble(const SchemeConfig& c, const DriftModel& model,
                                     const StableSpec& spec) {
  check_config(c, model, spec);
  if (c.scheme == Scheme::ExactOU)
    require(model.kind() == DriftKind::OU, ErrorCode::ConfigInvalid,
            "the exact OU scheme needs the OU drift");
  const auto t0 = std::chrono::steady_clock::now();
  TrajectoryEnsemble e = empty_ensemble(c, model);
  const std::size_t d = e.dim, N = c.n_steps;
  if (c.keep_paths) e.paths.assign(c.n_traj * (N + 1) * d, 0.0);

  const double alpha = spec.alpha();
  const double stable_scale = std::pow(c.eta, 1.0 / alpha);
  const double pareto_scale = stable_scale / spec.sigma();
  const double theta = model.kind() == DriftKind::OU ? model.family_parameter() : 0.0;
  const double ou_decay = std::exp(-theta * c.eta);
  const double ou_scale = c.scheme == Scheme::ExactOU && c.eta > 0.0
                              ? ou_transition_scale(alpha, theta, c.eta)
                              : 0.0;

  parallel_for(c.n_traj, [&](std::size_t begin, std::size_t end) {
    std::vector<double> y(d), drift(d), noise(d);
    for (std::size_t tr = begin; tr < end; ++tr) {
      RngStream stream(c.seed, tr);
      y = c.x0;
      double* path = c.keep_paths ? &e.paths[tr * (N + 1) * d] : nullptr;
      if (path) std::copy(y.begin(), y.end(), path);
      for (std::size_t k = 0; k < N; ++k) {
        switch (c.scheme) {
          case Scheme::StableEM:
            for (std::size_t i = 0; i < d; ++i)
              noise[i] = sample_stable_1d(stream, alpha, stable_scale);
            euler_update(y, drift, model, c.eta, noise);
            break;
          case Scheme::ParetoEM:
            for (std::size_t i = 0; i < d; ++i)
              noise[i] = pareto_scale * sample_pareto_1d(stream, alpha);
            euler_update(y, drift, model, c.eta, noise);
            break;
          case Scheme::ExactOU:
            for (std::size_t i = 0; i < d; ++i)
              y[i] = ou_decay * y[i] + sample_stable_1d(stream, alpha, ou_scale);
            break;
        }
        if (!all_finite(y)) throw TrajectoryDiverged(tr, k + 1);
        if (path) std::copy(y.begin(), y.end(), path + (k + 1) * d);
      }
      std::copy(y.begin(), y.end(), e.terminal.begin() + static_cast<std::ptrdiff_t>(tr * d));
    }
  });
  e.wall_time = seconds_since(t0);
  return e;
}

CoupledEnsembles simulate_coupled(const SchemeConfig& c, ReferenceKind reference,
                                  std::size_t refine, const DriftModel& model,
                                  const StableSpec& spec, const StableLaw* law) {
  check_config(c, model, spec);
  require(c.scheme == Scheme::StableEM || c.scheme == Scheme::ParetoEM,
          ErrorCode::ConfigInvalid, "coupled runs compare the stable or Pareto scheme");
  require(!c.keep_paths, ErrorCode::ConfigInvalid, "coupled runs keep terminal states only");
  if (reference == ReferenceKind::ExactOU)
    require(model.kind() == DriftKind::OU, ErrorCode::ConfigInvalid,
            "the exact OU reference needs the OU drift");
  else
    require(refine >= 1, ErrorCode::ConfigInvalid, "refine must be positive");
  const bool pareto = c.scheme == Scheme::ParetoEM;
  if (pareto)
    require(law != nullptr && law->alpha() == spec.alpha(), ErrorCode::ConfigInvalid,
            "Pareto coupling needs the StableLaw of the same alpha");

  const auto t0 = std::chrono::steady_clock::now();
  CoupledEnsembles out{empty_ensemble(c, model), empty_ensemble(c, model)};
  out.reference.config.scheme =
      reference == ReferenceKind::ExactOU ? Scheme::ExactOU : Scheme::StableEM;
  const std::size_t d = model.dim(), N = c.n_steps;
  const double alpha = spec.alpha();
  const double stable_scale = std::pow(c.eta, 1.0 / alpha);
  const double pareto_scale = stable_scale / spec.sigma();
  const double theta = model.kind() == DriftKind::OU ? model.family_parameter() : 0.0;
  const double ou_decay = std::exp(-theta * c.eta);
  const double ou_scale = reference == ReferenceKind::ExactOU && c.eta > 0.0
                              ? ou_transition_scale(alpha, theta, c.eta)
                              : 0.0;
  const double fine_eta = c.eta / static_cast<double>(refine);
  const double fine_scale = std::pow(fine_eta, 1.0 / alpha);
  const double sum_to_unit = std::pow(static_cast<double>(refine), -1.0 / alpha);

  parallel_for(c.n_traj, [&](std::size_t begin, std::size_t end) {
    std::vector<double> y(d), x(d), drift(d), noise(d), fine_noise(d), sums(d);
    for (std::size_t tr = begin; tr < end; ++tr) {
      RngStream stream(c.seed, tr);
      y = c.x0;
      x = c.x0;
      for (std::size_t k = 0; k < N; ++k) {
        if (reference == ReferenceKind::ExactOU) {
          for (std::size_t i = 0; i < d; ++i) {
            double raw;
            if (pareto) {
              const ParetoStablePair p = sample_pareto_stable_pair(stream, *law);
              noise[i] = pareto_scale * p.pareto;
              raw = p.stable;
            } else {
              raw = sample_stable_1d(stream, alpha, 1.0);
              noise[i] = stable_scale * raw;
            }
            x[i] = ou_decay * x[i] + ou_scale * raw;
          }
        } else {
          std::fill(sums.begin(), sums.end(), 0.0);
          for (std::size_t j = 0; j < refine; ++j) {
            for (std::size_t i = 0; i < d; ++i) {
              const double raw = sample_stable_1d(stream, alpha, 1.0);
              sums[i] += raw;
              fine_noise[i] = fine_scale * raw;
            }
            euler_update(x, drift, model, fine_eta, fine_noise);
          }
          for (std::size_t i = 0; i < d; ++i) {
            const double unit = sums[i] * sum_to_unit;  // standard stable
            if (pareto) {
              const double t = law->exp_level_of_magnitude(std::abs(unit));
              const double mag = std::max(std::exp(t / alpha), std::nextafter(1.0, 2.0));
              noise[i] = pareto_scale * std::copysign(mag, unit);
            } else {
              noise[i] = stable_scale * unit;
            }
          }
        }
        euler_update(y, drift, model, c.eta, noise);
        if (!all_finite(y) || !all_finite(x)) throw TrajectoryDiverged(tr, k + 1);
      }
      const auto row = static_cast<std::ptrdiff_t>(tr * d);
      std::copy(y.begin(), y.end(), out.scheme.terminal.begin() + row);
      std::copy(x.begin(), x.end(), out.reference.terminal.begin() + row);
    }
  });
  out.scheme.wall_time = out.reference.wall_time = seconds_since(t0);
  return out;
}

// ---------------------------------------------------------------------------
// I/O

std::string ensemble_csv(const TrajectoryEnsemble& e) {
  std::string s;
  for (std::size_t j = 0; j < e.dim; ++j) s += (j ? ",x" : "x") + std::to_string(j);
  s += '\n';
  char buf[32];
  for (std::size_t i = 0; i < e.n_traj; ++i) {
    for (std::size_t j = 0; j < e.dim; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", e.terminal[i * e.dim + j]);
      if (j) s += ',';
      s += buf;
    }
    s += '\n';
  }
  return s;
}

void write_ensemble_csv(const TrajectoryEnsemble& e, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), ErrorCode::Io, "cannot open " + path + " for writing");
  os << ensemble_csv(e);
  require(static_cast<bool>(os), ErrorCode::Io, "write failed: " + path);
}

namespace {

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void write_ensemble_binary(const TrajectoryEnsemble& e, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), ErrorCode::Io, "cannot open " + path + " for writing");
  os.write("HTEM1", 5);
  put_u64(os, e.n_traj);
  put_u64(os, e.dim);
  for (double v : e.terminal) put_u64(os, std::bit_cast<std::uint64_t>(v));
  require(static_cast<bool>(os), ErrorCode::Io, "write failed: " + path);
}

TrajectoryEnsemble read_ensemble_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorCode::Io, "cannot open " + path);
  char magic[5];
  is.read(magic, 5);
  require(is && std::memcmp(magic, "HTEM1", 5) == 0, ErrorCode::Io,
          path + " is not an HTEM1 file");
  TrajectoryEnsemble e;
  e.n_traj = get_u64(is);
  e.dim = get_u64(is);
  require(static_cast<bool>(is) && e.dim > 0 && e.n_traj < (1ull << 40),
          ErrorCode::Io, "corrupt HTEM1 header in " + path);
  e.terminal.resize(e.n_traj * e.dim);
  for (double& v : e.terminal) v = std::bit_cast<double>(get_u64(is));
  require(static_cast<bool>(is), ErrorCode::Io, "truncated HTEM1 file " + path);
  return e;
}

TrajectoryEnsemble read_ensemble_csv(const std::string& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), ErrorCode::Io, "cannot open " + path);
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), ErrorCode::Io, "empty CSV " + path);
  TrajectoryEnsemble e;
  e.dim = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t cols = 0;
    while (std::getline(ss, cell, ',')) {
      e.terminal.push_back(std::stod(cell));
      ++cols;
    }
    require(cols == e.dim, ErrorCode::Io, "ragged CSV row in " + path);
    ++e.n_traj;
  }
  return e;
}

}  // namespace htem
