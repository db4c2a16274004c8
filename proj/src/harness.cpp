#include "htem/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <limits>
#include <set>

#include "htem/error.hpp"
#include "htem/fraclap.hpp"
#include "htem/ledger.hpp"
#include "htem/metrics.hpp"
#include "htem/parallel.hpp"
#include "htem/stable.hpp"

namespace htem {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kDrawBlock = 4096;

// Config parsing helpers: every key must be known, types are checked.
json parse_config(const std::string& text, const std::set<std::string>& allowed,
                  bool version_required = true) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigInvalid, std::string("config is not valid JSON: ") + e.what());
  }
  require(j.is_object(), ErrorCode::ConfigInvalid, "config must be a JSON object");
  require((!version_required && !j.contains("schema_version")) ||
              (j.contains("schema_version") && j["schema_version"].is_number_integer() &&
               j["schema_version"].get<int>() == kSchemaVersion),
          ErrorCode::ConfigInvalid, "config needs \"schema_version\": 1");
  for (const auto& item : j.items())
    require(item.key() == "schema_version" || allowed.count(item.key()) != 0,
            ErrorCode::ConfigInvalid, "unknown config key '" + item.key() + "'");
  return j;
}

template <class T>
T get_as(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::ConfigInvalid, std::string("config key '") + key + "' has the wrong type");
  }
}

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = get_as<T>(j, key);
}

DriftSpec drift_from_json(const json& j) {
  require(j.is_object(), ErrorCode::ConfigInvalid, "\"drift\" must be an object");
  DriftSpec d;
  for (const auto& item : j.items())
    require(item.key() == "kind" || item.key() == "theta" || item.key() == "a" ||
                item.key() == "dim",
            ErrorCode::ConfigInvalid, "unknown drift key '" + item.key() + "'");
  read_opt(j, "kind", d.kind);
  read_opt(j, "theta", d.theta);
  read_opt(j, "a", d.a);
  read_opt(j, "dim", d.dim);
  return d;
}

ordered_json drift_to_json(const DriftSpec& d) {
  ordered_json j;
  j["kind"] = d.kind;
  if (d.kind == "ou") j["theta"] = d.theta;
  if (d.kind == "sine") j["a"] = d.a;
  j["dim"] = d.dim;
  return j;
}

const char* reference_name(ReferenceChoice r) {
  switch (r) {
    case ReferenceChoice::Auto: return "auto";
    case ReferenceChoice::ExactOU: return "exact_ou";
    case ReferenceChoice::FineGrid: return "fine_grid";
  }
  return "auto";
}

ReferenceChoice parse_reference(const std::string& s) {
  if (s == "auto") return ReferenceChoice::Auto;
  if (s == "exact_ou") return ReferenceChoice::ExactOU;
  if (s == "fine_grid") return ReferenceChoice::FineGrid;
  fail(ErrorCode::ConfigInvalid, "unknown reference '" + s + "'");
}

// W1 between the terminal laws: exact in 1-d, sliced surrogate otherwise.
double ensemble_w1(const TrajectoryEnsemble& a, const TrajectoryEnsemble& b,
                   std::uint64_t seed) {
  if (a.dim == 1) return w1_1d(a.terminal, b.terminal);
  return w1_sliced(EmpiricalMeasure(a.terminal, a.dim), EmpiricalMeasure(b.terminal, b.dim),
                   64, seed)
      .value;
}

// W1 with a block standard error (16 contiguous trajectory blocks).
W1Estimate ensemble_w1_with_error(const TrajectoryEnsemble& a, const TrajectoryEnsemble& b,
                                  std::uint64_t seed) {
  W1Estimate est;
  est.value = ensemble_w1(a, b, seed);
  const std::size_t blocks = std::min<std::size_t>(16, a.n_traj);
  est.n_blocks = blocks;
  if (blocks < 2) return est;
  std::vector<double> vals;
  const std::size_t per = a.n_traj / blocks, d = a.dim;
  for (std::size_t k = 0; k < blocks; ++k) {
    TrajectoryEnsemble sa, sb;
    sa.n_traj = sb.n_traj = per;
    sa.dim = sb.dim = d;
    const auto lo = static_cast<std::ptrdiff_t>(k * per * d);
    const auto hi = static_cast<std::ptrdiff_t>((k + 1) * per * d);
    sa.terminal.assign(a.terminal.begin() + lo, a.terminal.begin() + hi);
    sb.terminal.assign(b.terminal.begin() + lo, b.terminal.begin() + hi);
    vals.push_back(ensemble_w1(sa, sb, seed));
  }
  double mean = 0.0;
  for (double v : vals) mean += v;
  mean /= static_cast<double>(blocks);
  double ss = 0.0;
  for (double v : vals) ss += (v - mean) * (v - mean);
  // A block value has about `blocks` times the variance of the full-sample value.
  est.std_error = std::sqrt(ss / static_cast<double>(blocks - 1) / static_cast<double>(blocks));
  return est;
}

double norm(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

DriftModel make_drift(const DriftSpec& s) {
  require(s.dim >= 1, ErrorCode::ConfigInvalid, "drift dim must be positive");
  if (s.kind == "ou") {
    require(s.theta > 0.0, ErrorCode::ConfigInvalid, "OU drift needs theta > 0");
    return DriftModel::ou(s.theta, s.dim);
  }
  if (s.kind == "sine") {
    require(s.a > 0.0 && s.a < 1.0, ErrorCode::ConfigInvalid, "sine drift needs 0 < a < 1");
    return DriftModel::sine_perturbed(s.a, s.dim);
  }
  if (s.kind == "tanh") return DriftModel::tanh_distant(s.dim);
  fail(ErrorCode::ConfigInvalid, "unknown drift kind '" + s.kind + "'");
}

ConstantsRequest ConstantsRequest::from_json(const std::string& text) {
  const json j = parse_config(text, {"alpha", "drift", "eta", "x0", "C2_user"}, false);
  ConstantsRequest r;
  if (j.contains("drift")) r.drift = drift_from_json(j["drift"]);
  read_opt(j, "alpha", r.alpha);
  read_opt(j, "eta", r.eta);
  read_opt(j, "x0", r.x0);
  if (j.contains("C2_user") && !j["C2_user"].is_null()) r.C2_user = get_as<double>(j, "C2_user");
  return r;
}

ConstantLedger ConstantsRequest::evaluate() const {
  const DriftModel model = make_drift(drift);
  const std::vector<double> start = x0.empty() ? std::vector<double>(drift.dim, 0.0) : x0;
  return build_ledger(model, StableSpec(alpha, drift.dim), start, eta, C2_user);
}

std::vector<double> sample_draws(const std::string& kind, double alpha, double scale,
                                 std::size_t n, std::uint64_t seed) {
  const StableSpec spec(alpha, 1);
  const bool pareto = kind == "pareto";
  require(pareto || kind == "stable", ErrorCode::ConfigInvalid,
          "sample kind must be 'stable' or 'pareto'");
  require(pareto || scale > 0.0, ErrorCode::Domain, "scale must be positive");
  std::vector<double> out(n);
  const std::size_t blocks = (n + kDrawBlock - 1) / kDrawBlock;
  parallel_for(blocks, [&](std::size_t b0, std::size_t b1) {
    for (std::size_t b = b0; b < b1; ++b) {
      RngStream stream(seed, b);
      const std::size_t end = std::min(n, (b + 1) * kDrawBlock);
      for (std::size_t i = b * kDrawBlock; i < end; ++i)
        out[i] = pareto ? sample_pareto_1d(stream, spec.alpha())
                        : sample_stable_1d(stream, spec.alpha(), scale);
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Convergence

std::vector<double> ConvergenceStudy::default_grid() {
  std::vector<double> g;
  for (int k = 4; k <= 9; ++k) g.push_back(std::ldexp(1.0, -k));
  return g;
}

ConvergenceStudy ConvergenceStudy::from_json(const std::string& text) {
  const json j = parse_config(text, {"scheme", "drift", "alpha", "eta_grid", "eta_exponents",
                                     "horizon_T", "n_traj", "repeats", "seed", "reference",
                                     "refine", "x0", "C2_user"});
  ConvergenceStudy s;
  if (j.contains("scheme")) s.scheme = parse_scheme(get_as<std::string>(j, "scheme"));
  if (j.contains("drift")) s.drift = drift_from_json(j["drift"]);
  read_opt(j, "alpha", s.alpha);
  require(!(j.contains("eta_grid") && j.contains("eta_exponents")), ErrorCode::ConfigInvalid,
          "give either eta_grid or eta_exponents");
  s.eta_grid = default_grid();
  read_opt(j, "eta_grid", s.eta_grid);
  if (j.contains("eta_exponents")) {
    const auto e = get_as<std::vector<int>>(j, "eta_exponents");
    require(e.size() == 2 && e[0] <= e[1] && e[0] >= 0 && e[1] <= 40, ErrorCode::ConfigInvalid,
            "eta_exponents must be [lo, hi] with 0 <= lo <= hi");
    s.eta_grid.clear();
    for (int k = e[0]; k <= e[1]; ++k) s.eta_grid.push_back(std::ldexp(1.0, -k));
  }
  read_opt(j, "horizon_T", s.horizon_T);
  read_opt(j, "n_traj", s.n_traj);
  read_opt(j, "repeats", s.repeats);
  read_opt(j, "seed", s.seed);
  if (j.contains("reference")) s.reference = parse_reference(get_as<std::string>(j, "reference"));
  read_opt(j, "refine", s.refine);
  s.x0.assign(s.drift.dim, 0.0);
  read_opt(j, "x0", s.x0);
  if (j.contains("C2_user")) s.C2_user = get_as<double>(j, "C2_user");
  return s;
}

std::string ConvergenceStudy::to_json() const {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["scheme"] = scheme_name(scheme);
  j["drift"] = drift_to_json(drift);
  j["alpha"] = alpha;
  j["eta_grid"] = eta_grid;
  j["horizon_T"] = horizon_T;
  j["n_traj"] = n_traj;
  j["repeats"] = repeats;
  j["seed"] = seed;
  j["reference"] = reference_name(reference);
  j["refine"] = refine;
  j["x0"] = x0;
  if (C2_user) j["C2_user"] = *C2_user;
  return j.dump(2);
}

LogFit fit_log2(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), ErrorCode::DimensionMismatch, "fit needs paired data");
  const std::size_t n = x.size();
  LogFit f{kNaN, kNaN, kNaN, kNaN};
  if (n < 2) return f;
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    lx[i] = std::log2(x[i]);
    ly[i] = std::log2(y[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  const double sse = std::max(0.0, syy - f.slope * sxy);
  f.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  f.slope_std_error = n > 2 ? std::sqrt(sse / static_cast<double>(n - 2) / sxx) : kNaN;
  return f;
}

RateFit run_convergence(const ConvergenceStudy& study, const ProgressFn& progress) {
  const ConvergenceStudy& s = study;
  require(s.scheme == Scheme::StableEM || s.scheme == Scheme::ParetoEM,
          ErrorCode::ConfigInvalid, "convergence studies use the stable or Pareto scheme");
  require(!s.eta_grid.empty(), ErrorCode::ConfigInvalid, "eta_grid is empty");
  require(s.n_traj >= 2 && s.repeats >= 1, ErrorCode::ConfigInvalid,
          "need n_traj >= 2 and repeats >= 1");
  require(s.refine >= 1, ErrorCode::ConfigInvalid, "refine must be positive");
  require(s.horizon_T >= 0.0 && std::isfinite(s.horizon_T), ErrorCode::ConfigInvalid,
          "horizon_T must be finite and >= 0");
  const DriftModel model = make_drift(s.drift);
  const StableSpec spec(s.alpha, model.dim());
  require(s.x0.size() == model.dim(), ErrorCode::DimensionMismatch,
          "x0 dimension differs from the drift dimension");
  for (std::size_t i = 0; i < s.eta_grid.size(); ++i) {
    const double eta = s.eta_grid[i];
    require(eta > 0.0 && eta <= 1.0, ErrorCode::ConfigInvalid, "every eta must lie in (0, 1]");
    require(i == 0 || eta < s.eta_grid[i - 1], ErrorCode::ConfigInvalid,
            "eta_grid must be strictly descending");
    require(stepsize_gate(model.params(), eta), ErrorCode::ConfigInvalid,
            "eta = " + fmt17(eta) + " fails the stepsize gate eta <= " +
                fmt17(stepsize_gate_limit(model.params())));
  }

  ReferenceChoice ref = s.reference;
  if (ref == ReferenceChoice::Auto)
    ref = model.kind() == DriftKind::OU ? ReferenceChoice::ExactOU : ReferenceChoice::FineGrid;
  require(ref != ReferenceChoice::ExactOU || model.kind() == DriftKind::OU,
          ErrorCode::ConfigInvalid, "the exact OU reference needs the OU drift");

  RateFit fit;
  fit.study = s;
  fit.reference = reference_name(ref);
  const bool pareto = s.scheme == Scheme::ParetoEM;
  fit.theory_slope = pareto ? 2.0 / s.alpha - 1.0 : 1.0;

  const Coupling coupling = compute_coupling(model.params(), s.alpha, spec.p_alpha());
  double T = s.horizon_T;
  if (T == 0.0) T = std::clamp(5.0 / coupling.C5, 10.0, 20.0);

  std::optional<StableLaw> law;
  if (pareto) law.emplace(s.alpha);

  LedgerInputs li;
  li.drift_name = model.name();
  li.alpha = s.alpha;
  li.dim = model.dim();
  li.drift = model.params();
  li.x0 = s.x0;
  li.C2_user = s.C2_user.value_or(kDefaultC2);
  li.frac_lapl_b0 = frac_laplacian_drift_at_zero(model, spec).value;

  for (double eta : s.eta_grid) {
    EtaRow row;
    row.eta = eta;
    row.n_steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(T / eta)));
    row.horizon = static_cast<double>(row.n_steps) * eta;
    SchemeConfig c;
    c.eta = eta;
    c.n_steps = row.n_steps;
    c.scheme = s.scheme;
    c.x0 = s.x0;
    c.n_traj = s.n_traj;
    for (std::size_t r = 0; r < s.repeats; ++r) {
      c.seed = derive_seed(s.seed, r);
      const CoupledEnsembles pair = simulate_coupled(
          c, ref == ReferenceChoice::ExactOU ? ReferenceKind::ExactOU : ReferenceKind::FineGrid,
          s.refine, model, spec, law ? &*law : nullptr);
      row.w1_repeats.push_back(ensemble_w1(pair.scheme, pair.reference, derive_seed(c.seed, 99)));
      if (progress)
        progress("eta=" + fmt17(eta) + " repeat " + std::to_string(r + 1) + "/" +
                 std::to_string(s.repeats) + " w1=" + fmt17(row.w1_repeats.back()));
    }
    row.w1_median = median(row.w1_repeats);
    row.w1_iqr = iqr(row.w1_repeats);
    row.mc_error =
        1.2533 * (row.w1_iqr / 1.349) / std::sqrt(static_cast<double>(s.repeats));
    li.eta = eta;
    row.bound = pareto ? compute_script_C_prime(li).value * std::pow(eta, fit.theory_slope)
                       : compute_script_C(li).value * eta;
    row.bound_ok = row.w1_median + 3.0 * row.mc_error <= row.bound;
    if (row.w1_iqr > 0.3 * row.w1_median &&
        std::find(fit.warnings.begin(), fit.warnings.end(), kWarnInsufficientTrajectories) ==
            fit.warnings.end())
      fit.warnings.push_back(kWarnInsufficientTrajectories);
    fit.per_eta.push_back(std::move(row));
  }

  std::vector<double> xs, ys;
  fit.dominance_ok = true;
  for (const auto& row : fit.per_eta) {
    xs.push_back(row.eta);
    ys.push_back(row.w1_median);
    fit.dominance_ok = fit.dominance_ok && row.bound_ok;
  }
  const LogFit f = fit_log2(xs, ys);
  fit.slope = f.slope;
  fit.intercept = f.intercept;
  fit.r_squared = f.r_squared;
  fit.slope_std_error = f.slope_std_error;

  int inversions = 0;
  bool overlap = true;
  for (std::size_t i = 1; i < fit.per_eta.size(); ++i) {
    const EtaRow& a = fit.per_eta[i - 1];
    const EtaRow& b = fit.per_eta[i];
    if (b.w1_median > a.w1_median) {
      ++inversions;
      overlap = overlap && (b.w1_median - b.w1_iqr / 2.0 <= a.w1_median + a.w1_iqr / 2.0);
    }
  }
  fit.monotone_ok = inversions == 0 || (inversions == 1 && overlap);
  return fit;
}

std::string RateFit::csv() const {
  std::string out = "eta,w1_median,w1_iqr,n_traj,repeats\n";
  for (const auto& r : per_eta)
    out += fmt17(r.eta) + "," + fmt17(r.w1_median) + "," + fmt17(r.w1_iqr) + "," +
           std::to_string(study.n_traj) + "," + std::to_string(study.repeats) + "\n";
  return out;
}

std::string RateFit::to_json() const {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["study"] = ordered_json::parse(study.to_json());
  j["reference"] = reference;
  ordered_json& f = j["fit"];
  f["slope_defined"] = std::isfinite(slope);
  f["slope"] = slope;
  f["intercept"] = intercept;
  f["r_squared"] = r_squared;
  f["slope_std_error"] = slope_std_error;
  f["theory_slope"] = theory_slope;
  ordered_json rows = ordered_json::array();
  for (const auto& r : per_eta) {
    ordered_json o;
    o["eta"] = r.eta;
    o["n_steps"] = r.n_steps;
    o["horizon"] = r.horizon;
    o["w1_median"] = r.w1_median;
    o["w1_iqr"] = r.w1_iqr;
    o["mc_error"] = r.mc_error;
    o["bound"] = r.bound;
    o["bound_ok"] = r.bound_ok;
    o["w1_repeats"] = r.w1_repeats;
    rows.push_back(std::move(o));
  }
  j["per_eta"] = std::move(rows);
  j["dominance_ok"] = dominance_ok;
  j["monotone_ok"] = monotone_ok;
  j["warnings"] = warnings;
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// OU analysis

OuOracleReport ou_oracle(double alpha, double eta) {
  require(alpha > 1.0 && alpha < 2.0, ErrorCode::Domain, "alpha must lie in (1, 2)");
  require(eta >= 0.0 && eta < 1.0, ErrorCode::Domain, "eta must lie in [0, 1)");
  OuOracleReport r;
  r.alpha = alpha;
  r.eta = eta;
  r.stationary_scale_X = std::pow(1.0 / alpha, 1.0 / alpha);
  r.first_order_coeff = r.stationary_scale_X * (alpha - 1.0) / (2.0 * alpha);
  r.printed_first_order_coeff = r.stationary_scale_X * (alpha + 1.0) / (2.0 * alpha);
  if (eta == 0.0) {
    r.stationary_scale_Y = r.stationary_scale_X;
    r.P_over_eta = r.first_order_coeff;
    return r;
  }
  // g = (1 - (1-eta)^alpha) / (alpha eta) and P = s_X (g^(-1/alpha) - 1).
  // For small eta, g - 1 comes from the binomial series so P keeps full
  // relative accuracy.
  double gm1;
  if (eta <= 0.5) {
    double c = -alpha * eta;  // C(alpha, k) (-eta)^k at k = 1
    double sum = 0.0;
    for (int k = 2; k < 4000; ++k) {
      c *= (alpha - k + 1) / k * (-eta);
      sum += c;
      if (std::abs(c) <= 1e-19 * std::abs(sum)) break;
    }
    gm1 = -sum / (alpha * eta);
  } else {
    gm1 = -std::expm1(alpha * std::log1p(-eta)) / (alpha * eta) - 1.0;
  }
  r.P_exact = r.stationary_scale_X * std::expm1(-std::log1p(gm1) / alpha);
  r.stationary_scale_Y = r.stationary_scale_X + r.P_exact;
  r.P_over_eta = r.P_exact / eta;
  return r;
}

std::string OuOracleReport::to_json() const {
  ordered_json j;
  j["alpha"] = alpha;
  j["eta"] = eta;
  j["P_exact"] = P_exact;
  j["stationary_scale_X"] = stationary_scale_X;
  j["stationary_scale_Y"] = stationary_scale_Y;
  j["first_order_coeff"] = first_order_coeff;
  j["printed_first_order_coeff"] = printed_first_order_coeff;
  j["P_over_eta"] = P_over_eta;
  return j.dump(2);
}

OuInvariantReport ou_invariant_w1_check(double alpha, double eta, std::size_t n,
                                        std::uint64_t seed) {
  require(n >= 16, ErrorCode::ConfigInvalid, "need at least 16 draws");
  const OuOracleReport o = ou_oracle(alpha, eta);
  OuInvariantReport r;
  r.alpha = alpha;
  r.eta = eta;
  r.n = n;
  r.P = o.P_exact;
  r.E_abs_xi = stable_abs_moment(alpha, 1.0);
  r.bound = std::abs(r.P) * r.E_abs_xi;

  const std::vector<double> xi = sample_draws("stable", alpha, 1.0, n, seed);
  const std::vector<double> xi2 = sample_draws("stable", alpha, 1.0, n, derive_seed(seed, 1));
  const W1Estimate mom = mom_abs_moment(EmpiricalMeasure::from_1d(xi), 1.0);
  r.E_abs_xi_mom = mom.value;
  r.E_abs_xi_mom_se = mom.std_error;

  TrajectoryEnsemble X, Y, Yc;
  X.n_traj = Y.n_traj = Yc.n_traj = n;
  X.dim = Y.dim = Yc.dim = 1;
  X.terminal.resize(n);
  Y.terminal.resize(n);
  Yc.terminal.resize(n);
  double mean_abs = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    X.terminal[i] = o.stationary_scale_X * xi[i];
    Yc.terminal[i] = o.stationary_scale_Y * xi[i];
    Y.terminal[i] = o.stationary_scale_Y * xi2[i];
    mean_abs += std::abs(xi[i]);
  }
  mean_abs /= static_cast<double>(n);
  const W1Estimate ind = ensemble_w1_with_error(X, Y, seed);
  r.w1_independent = ind.value;
  r.w1_independent_se = ind.std_error;
  r.independent_ok = r.w1_independent <= r.bound + 3.0 * r.w1_independent_se;
  r.w1_coupled = ensemble_w1(X, Yc, seed);
  r.coupled_ratio = r.bound > 0.0 ? r.w1_coupled / r.bound : (r.w1_coupled == 0.0 ? 1.0 : kNaN);
  const double expected = std::abs(r.P) * mean_abs;
  r.coupled_ok = std::abs(r.w1_coupled - expected) <= 1e-9 * std::max(expected, 1e-300) ||
                 r.w1_coupled == expected;
  return r;
}

std::string OuInvariantReport::to_json() const {
  ordered_json j;
  j["alpha"] = alpha;
  j["eta"] = eta;
  j["n"] = n;
  j["P"] = P;
  j["E_abs_xi"] = E_abs_xi;
  j["E_abs_xi_mom"] = E_abs_xi_mom;
  j["E_abs_xi_mom_se"] = E_abs_xi_mom_se;
  j["bound"] = bound;
  j["w1_independent"] = w1_independent;
  j["w1_independent_se"] = w1_independent_se;
  j["independent_ok"] = independent_ok;
  j["w1_coupled"] = w1_coupled;
  j["coupled_ratio"] = coupled_ratio;
  j["coupled_ok"] = coupled_ok;
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Audit

void AuditConfig::complete_defaults() {
  const std::size_t d = drift.dim;
  if (starts.empty()) {
    std::vector<double> far(d, 0.0);
    far[0] = 2.0;
    starts = {std::vector<double>(d, 0.0), far};
  }
  if (mix_x.empty()) mix_x.assign(d, 0.0);
  if (mix_y.empty()) {
    mix_y.assign(d, 0.0);
    mix_y[0] = 4.0;
  }
}

AuditConfig AuditConfig::from_json(const std::string& text) {
  const json j = parse_config(text, {"scheme", "drift", "alpha", "eta", "checkpoints", "starts",
                                     "mix_x", "mix_y", "n_traj", "seed", "refine", "mom_blocks",
                                     "reference_moments"});
  AuditConfig c;
  if (j.contains("scheme")) c.scheme = parse_scheme(get_as<std::string>(j, "scheme"));
  if (j.contains("drift")) c.drift = drift_from_json(j["drift"]);
  read_opt(j, "alpha", c.alpha);
  read_opt(j, "eta", c.eta);
  read_opt(j, "checkpoints", c.checkpoints);
  read_opt(j, "starts", c.starts);
  read_opt(j, "mix_x", c.mix_x);
  read_opt(j, "mix_y", c.mix_y);
  read_opt(j, "n_traj", c.n_traj);
  read_opt(j, "seed", c.seed);
  read_opt(j, "refine", c.refine);
  read_opt(j, "mom_blocks", c.mom_blocks);
  read_opt(j, "reference_moments", c.reference_moments);
  c.complete_defaults();
  return c;
}

std::string AuditConfig::to_json() const {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["scheme"] = scheme_name(scheme);
  j["drift"] = drift_to_json(drift);
  j["alpha"] = alpha;
  j["eta"] = eta;
  j["checkpoints"] = checkpoints;
  j["starts"] = starts;
  j["mix_x"] = mix_x;
  j["mix_y"] = mix_y;
  j["n_traj"] = n_traj;
  j["seed"] = seed;
  j["refine"] = refine;
  j["mom_blocks"] = mom_blocks;
  j["reference_moments"] = reference_moments;
  return j.dump(2);
}

AuditReport run_ergodicity_audit(const AuditConfig& config_in, const ProgressFn& progress) {
  AuditConfig cfg = config_in;
  cfg.complete_defaults();
  require(cfg.scheme == Scheme::StableEM || cfg.scheme == Scheme::ParetoEM,
          ErrorCode::ConfigInvalid, "audits cover the stable or Pareto scheme");
  require(cfg.eta > 0.0 && cfg.eta <= 1.0, ErrorCode::ConfigInvalid, "eta must lie in (0, 1]");
  require(!cfg.checkpoints.empty(), ErrorCode::ConfigInvalid, "no checkpoints");
  require(std::is_sorted(cfg.checkpoints.begin(), cfg.checkpoints.end()),
          ErrorCode::ConfigInvalid, "checkpoints must be ascending");
  require(cfg.n_traj >= 16 && cfg.refine >= 1 && cfg.mom_blocks >= 8, ErrorCode::ConfigInvalid,
          "need n_traj >= 16, refine >= 1, mom_blocks >= 8");
  const DriftModel model = make_drift(cfg.drift);
  const std::size_t d = model.dim();
  const StableSpec spec(cfg.alpha, d);
  for (const auto& x : cfg.starts)
    require(x.size() == d, ErrorCode::DimensionMismatch, "start dimension differs from drift");
  require(cfg.mix_x.size() == d && cfg.mix_y.size() == d, ErrorCode::DimensionMismatch,
          "mixing start dimension differs from drift");

  AuditReport rep;
  rep.config = cfg;
  const DriftParams& P = model.params();
  if (!stepsize_gate(P, cfg.eta)) rep.warnings.push_back(kWarnStepsizeGate);
  const double p = spec.p_alpha();
  const double C3 = compute_C3(1.0, P.theta4, P.K, P.b0_norm, d, cfg.alpha, p);
  const double C4 = compute_C4(1.0, cfg.eta, P, d, cfg.alpha, p);
  const double C7 = compute_C7(cfg.eta, P, d, cfg.alpha, spec.sigma());
  const bool pareto = cfg.scheme == Scheme::ParetoEM;
  const bool ou = model.kind() == DriftKind::OU;

  auto add_moment = [&](const std::string& name, const std::vector<double>& x0, std::size_t k,
                        const TrajectoryEnsemble& e, double bound) {
    MomentCheck m;
    m.bound_name = name;
    m.x0 = x0;
    m.k = k;
    m.t = static_cast<double>(k) * cfg.eta;
    const W1Estimate est = mom_abs_moment(EmpiricalMeasure(e.terminal, d), 1.0, cfg.mom_blocks,
                                          derive_seed(cfg.seed, k));
    m.estimate = est.value;
    m.std_error = est.std_error;
    m.bound = bound;
    m.margin = bound - (m.estimate + 3.0 * m.std_error);
    m.ok = m.margin >= 0.0;
    rep.moments.push_back(std::move(m));
  };

  std::uint64_t tag = 0;
  for (std::size_t si = 0; si < cfg.starts.size(); ++si) {
    const std::vector<double>& x0 = cfg.starts[si];
    const double v1 = std::sqrt(1.0 + norm(x0) * norm(x0));
    for (std::size_t k : cfg.checkpoints) {
      SchemeConfig c;
      c.eta = cfg.eta;
      c.n_steps = k;
      c.scheme = cfg.scheme;
      c.x0 = x0;
      c.n_traj = cfg.n_traj;
      c.seed = derive_seed(cfg.seed, ++tag);
      const TrajectoryEnsemble chain = simulate_ensemble(c, model, spec);
      if (pareto)
        add_moment("C7", x0, k, chain, v1 + 2.0 * C7 / P.theta4);
      else
        add_moment("C4", x0, k, chain, C4 * v1);
      if (cfg.reference_moments) {
        SchemeConfig rc = c;
        rc.seed = derive_seed(cfg.seed, ++tag);
        if (ou) {
          rc.scheme = Scheme::ExactOU;
        } else {
          rc.scheme = Scheme::StableEM;
          rc.eta = cfg.eta / static_cast<double>(cfg.refine);
          rc.n_steps = k * cfg.refine;
        }
        const TrajectoryEnsemble ref = simulate_ensemble(rc, model, spec);
        add_moment("C3", x0, k, ref, C3 * v1);
      }
      if (progress)
        progress("start " + std::to_string(si) + " checkpoint k=" + std::to_string(k));
    }
  }
  rep.moments_ok = std::all_of(rep.moments.begin(), rep.moments.end(),
                               [](const MomentCheck& m) { return m.ok; });

  // Merging of the laws started at mix_x and mix_y (shared noise).
  const Coupling coupling = compute_coupling(P, cfg.alpha, p);
  std::vector<double> diff(d);
  for (std::size_t i = 0; i < d; ++i) diff[i] = cfg.mix_x[i] - cfg.mix_y[i];
  const double gap = norm(diff);
  for (std::size_t ci = 0; ci < cfg.checkpoints.size(); ++ci) {
    const std::size_t k = cfg.checkpoints[ci];
    SchemeConfig c;
    c.eta = cfg.eta;
    c.n_steps = k;
    c.scheme = cfg.scheme;
    c.n_traj = cfg.n_traj;
    c.seed = derive_seed(cfg.seed, 1000 + ci);
    c.x0 = cfg.mix_x;
    const TrajectoryEnsemble ex = simulate_ensemble(c, model, spec);
    c.x0 = cfg.mix_y;
    const TrajectoryEnsemble ey = simulate_ensemble(c, model, spec);
    const W1Estimate w = ensemble_w1_with_error(ex, ey, c.seed);
    rep.mixing.push_back({k, w.value, w.std_error});
    ContractionCheck cc;
    cc.k = k;
    cc.t = static_cast<double>(k) * cfg.eta;
    cc.w1 = w.value;
    cc.bound = coupling.decay_factor * std::exp(-coupling.C5 * cc.t) * gap;
    cc.holds = cc.w1 <= cc.bound + 3.0 * w.std_error;
    rep.contraction.push_back(cc);
    if (progress) progress("mixing checkpoint k=" + std::to_string(k));
  }
  if (rep.mixing.size() >= 2) {
    const MixingCheck& a = rep.mixing.front();
    const MixingCheck& b = rep.mixing.back();
    rep.mixing_ok = b.w1 + 3.0 * b.std_error < a.w1 - 3.0 * a.std_error;
  } else {
    rep.mixing_ok = true;
  }
  rep.passed = rep.moments_ok && rep.mixing_ok;
  return rep;
}

std::string AuditReport::to_json() const {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["config"] = ordered_json::parse(config.to_json());
  ordered_json ms = ordered_json::array();
  for (const auto& m : moments) {
    ordered_json o;
    o["bound_name"] = m.bound_name;
    o["x0"] = m.x0;
    o["k"] = m.k;
    o["t"] = m.t;
    o["estimate"] = m.estimate;
    o["std_error"] = m.std_error;
    o["bound"] = m.bound;
    o["margin"] = m.margin;
    o["ok"] = m.ok;
    ms.push_back(std::move(o));
  }
  j["moments"] = std::move(ms);
  ordered_json mx = ordered_json::array();
  for (const auto& m : mixing) mx.push_back({{"k", m.k}, {"w1", m.w1}, {"std_error", m.std_error}});
  j["mixing"] = std::move(mx);
  ordered_json cs = ordered_json::array();
  for (const auto& c : contraction)
    cs.push_back({{"k", c.k}, {"t", c.t}, {"w1", c.w1}, {"bound", c.bound}, {"holds", c.holds}});
  j["contraction_informational"] = std::move(cs);
  j["moments_ok"] = moments_ok;
  j["mixing_ok"] = mixing_ok;
  j["passed"] = passed;
  j["warnings"] = warnings;
  return j.dump(2);
}

void require_audit_passed(const AuditReport& r) {
  for (const auto& m : r.moments)
    if (!m.ok)
      fail(ErrorCode::BoundViolated, m.bound_name + " moment bound violated at k=" +
                                         std::to_string(m.k) + " (margin " + fmt17(m.margin) +
                                         ")");
  if (!r.mixing_ok) fail(ErrorCode::BoundViolated, "laws from the two starts did not merge");
}

}  // namespace htem
