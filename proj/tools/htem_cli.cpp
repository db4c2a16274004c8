// Command-line front end; talks to the library through the C interface only.
#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "htem/htem.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitBound = 2;

bool g_json_errors = false;
bool g_verbose = false;

struct CliFailure {
  int exit_code;
  std::string code;
  std::string message;
};

int exit_code_for(htem_status s) {
  return s == HTEM_ERR_BOUND_VIOLATED || s == HTEM_ERR_TRAJECTORY_DIVERGED ? kExitBound
                                                                           : kExitConfig;
}

void check(htem_status s) {
  if (s != HTEM_OK) throw CliFailure{exit_code_for(s), htem_status_name(s), htem_last_error()};
}

[[noreturn]] void config_error(const std::string& msg) {
  throw CliFailure{kExitConfig, "ConfigInvalid", msg};
}

struct OwnedString {
  char* p = nullptr;
  ~OwnedString() { htem_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) config_error("cannot read " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    std::fflush(stdout);
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw CliFailure{kExitConfig, "Io", "cannot write " + path};
  os << text;
  if (!os) throw CliFailure{kExitConfig, "Io", "write failed: " + path};
}

std::string with_newline(std::string s) {
  if (s.empty() || s.back() != '\n') s += '\n';
  return s;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void progress_to_stderr(const char* line, void*) {
  if (g_verbose) std::fprintf(stderr, "%s\n", line);
}

// --- sample ---------------------------------------------------------------

struct SampleArgs {
  std::string kind = "stable";
  double alpha = 1.5;
  double scale = 1.0;
  std::size_t n = 1000;
  std::uint64_t seed = 1;
  std::string out = "-";
};

int run_sample(const SampleArgs& a) {
  std::vector<double> v(a.n);
  check(htem_sample(a.kind.c_str(), a.alpha, a.scale, a.seed, a.n, v.data()));
  std::string text = "x\n";
  text.reserve(a.n * 24);
  for (double x : v) text += fmt17(x) + "\n";
  write_output(a.out, text);
  return kExitOk;
}

// --- simulate -------------------------------------------------------------

struct DriftArgs {
  std::string kind = "ou";
  double theta = 1.0;
  double a = 0.5;
  std::size_t dim = 1;
  double param() const { return kind == "sine" ? a : theta; }
};

struct SimulateArgs {
  std::string config;
  DriftArgs drift;
  double alpha = 1.5;
  std::string scheme = "stable";
  double eta = 0.01;
  std::uint64_t steps = 100;
  std::uint64_t n_traj = 1000;
  std::uint64_t seed = 1;
  std::vector<double> x0;
  std::string out = "-";
  std::string format = "csv";
};

void apply_simulate_config(SimulateArgs& a) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(a.config));
    if (!j.is_object()) config_error("simulate config must be a JSON object");
    if (j.value("schema_version", 0) != 1) config_error("config needs \"schema_version\": 1");
    for (const auto& item : j.items()) {
      static const std::vector<std::string> keys = {"schema_version", "drift", "alpha", "scheme",
                                                    "eta", "n_steps", "n_traj", "seed", "x0"};
      if (std::find(keys.begin(), keys.end(), item.key()) == keys.end())
        config_error("unknown config key '" + item.key() + "'");
    }
    if (j.contains("drift")) {
      const auto& d = j["drift"];
      a.drift.kind = d.value("kind", a.drift.kind);
      a.drift.theta = d.value("theta", a.drift.theta);
      a.drift.a = d.value("a", a.drift.a);
      a.drift.dim = d.value("dim", a.drift.dim);
    }
    a.alpha = j.value("alpha", a.alpha);
    a.scheme = j.value("scheme", a.scheme);
    a.eta = j.value("eta", a.eta);
    a.steps = j.value("n_steps", a.steps);
    a.n_traj = j.value("n_traj", a.n_traj);
    a.seed = j.value("seed", a.seed);
    if (j.contains("x0")) a.x0 = j["x0"].get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("bad simulate config: ") + e.what());
  }
}

int run_simulate(SimulateArgs a) {
  if (!a.config.empty()) apply_simulate_config(a);
  if (a.format != "csv" && a.format != "binary") config_error("--format must be csv or binary");
  if (a.format == "binary" && (a.out.empty() || a.out == "-"))
    config_error("binary output needs --out PATH");
  htem_drift* drift = nullptr;
  check(htem_drift_create(a.drift.kind.c_str(), a.drift.param(), a.drift.dim, &drift));
  std::unique_ptr<htem_drift, decltype(&htem_drift_destroy)> dg(drift, &htem_drift_destroy);
  if (a.x0.empty()) a.x0.assign(a.drift.dim, 0.0);
  if (a.x0.size() != a.drift.dim) config_error("--x0 needs one value per dimension");
  htem_ensemble* ens = nullptr;
  check(htem_simulate(drift, a.alpha, a.scheme.c_str(), a.eta, a.steps, a.x0.data(), a.seed,
                      a.n_traj, &ens));
  std::unique_ptr<htem_ensemble, decltype(&htem_ensemble_destroy)> eg(ens,
                                                                       &htem_ensemble_destroy);
  if (!htem_ensemble_stepsize_gate_ok(ens))
    std::fprintf(stderr, "warning: eta exceeds the stepsize gate of the rate theorems\n");
  if (a.out.empty() || a.out == "-") {
    OwnedString csv;
    check(htem_ensemble_csv(ens, &csv.p));
    write_output("-", csv.str());
  } else {
    check(htem_ensemble_write(ens, a.out.c_str(), a.format.c_str()));
  }
  return kExitOk;
}

// --- converge -------------------------------------------------------------

struct ConvergeArgs {
  std::string config;
  std::string csv = "-";
  std::string fit;
};

int run_converge(const ConvergeArgs& a) {
  const std::string cfg = read_file(a.config);
  OwnedString json, csv;
  check(htem_converge_json(cfg.c_str(), progress_to_stderr, nullptr, &json.p, &csv.p));
  write_output(a.csv, csv.str());
  if (!a.fit.empty()) write_output(a.fit, with_newline(json.str()));
  const auto fit = nlohmann::json::parse(json.str());
  if (!fit.value("dominance_ok", false)) {
    std::fprintf(stderr, "error: a measured W1 exceeds its theorem bound\n");
    return kExitBound;
  }
  return kExitOk;
}

// --- constants ------------------------------------------------------------

struct ConstantsArgs {
  DriftArgs drift;
  double alpha = 1.5;
  double eta = 0.01;
  std::vector<double> x0;
  double c2 = -1.0;
  std::string out = "-";
};

int run_constants(const ConstantsArgs& a) {
  nlohmann::ordered_json req;
  req["alpha"] = a.alpha;
  req["drift"] = {{"kind", a.drift.kind}, {"theta", a.drift.theta}, {"a", a.drift.a},
                  {"dim", a.drift.dim}};
  req["eta"] = a.eta;
  req["x0"] = a.x0.empty() ? std::vector<double>(a.drift.dim, 0.0) : a.x0;
  if (a.c2 >= 0.0) req["C2_user"] = a.c2;
  OwnedString out;
  check(htem_constants_json(req.dump().c_str(), &out.p));
  write_output(a.out, with_newline(out.str()));
  return kExitOk;
}

// --- oracle-ou ------------------------------------------------------------

struct OracleArgs {
  double alpha = 1.5;
  double eta = 0.01;
  std::uint64_t invariant_n = 0;
  std::uint64_t seed = 1;
  std::string out = "-";
};

int run_oracle(const OracleArgs& a) {
  OwnedString out;
  check(htem_oracle_ou_json(a.alpha, a.eta, &out.p));
  if (a.invariant_n == 0) {
    write_output(a.out, with_newline(out.str()));
    return kExitOk;
  }
  OwnedString inv;
  check(htem_ou_invariant_json(a.alpha, a.eta, a.invariant_n, a.seed, &inv.p));
  nlohmann::ordered_json j;
  j["oracle"] = nlohmann::ordered_json::parse(out.str());
  j["invariant_check"] = nlohmann::ordered_json::parse(inv.str());
  write_output(a.out, j.dump(2) + "\n");
  return kExitOk;
}

// --- audit ----------------------------------------------------------------

struct AuditArgs {
  std::string config;
  std::string out = "-";
};

int run_audit(const AuditArgs& a) {
  const std::string cfg = read_file(a.config);
  OwnedString out;
  int passed = 0;
  check(htem_audit_json(cfg.c_str(), progress_to_stderr, nullptr, &out.p, &passed));
  write_output(a.out, with_newline(out.str()));
  if (!passed) {
    std::fprintf(stderr, "error: a moment bound or the mixing check failed\n");
    return kExitBound;
  }
  return kExitOk;
}

void add_drift_options(CLI::App* cmd, DriftArgs& d) {
  cmd->add_option("--drift", d.kind, "Drift family: ou, sine or tanh")
      ->check(CLI::IsMember({"ou", "sine", "tanh"}));
  cmd->add_option("--theta", d.theta, "OU rate");
  cmd->add_option("--a", d.a, "Sine perturbation amplitude in (0, 1)");
  cmd->add_option("--dim", d.dim, "Dimension");
}

void report_failure(const CliFailure& f) {
  if (g_json_errors) {
    nlohmann::ordered_json j;
    j["error"] = {{"code", f.code}, {"exit_code", f.exit_code}, {"message", f.message}};
    std::fprintf(stderr, "%s\n", j.dump().c_str());
  } else {
    std::fprintf(stderr, "error (%s): %s\n", f.code.c_str(), f.message.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Euler-Maruyama schemes for SDEs driven by alpha-stable noise"};
  app.require_subcommand(1);
  app.add_flag("--json", g_json_errors, "Report errors as JSON on stderr");
  app.add_flag("-v,--verbose", g_verbose, "Progress lines on stderr");
  std::size_t threads = 0;
  app.add_option("--threads", threads, "Worker threads (overrides HTEM_THREADS)");

  SampleArgs sample;
  auto* c_sample = app.add_subcommand("sample", "Emit raw stable or Pareto draws as CSV");
  c_sample->add_option("--kind", sample.kind, "stable or pareto")->check(CLI::IsMember({"stable", "pareto"}));
  c_sample->add_option("--alpha", sample.alpha, "Stability index in (1, 2)");
  c_sample->add_option("--scale", sample.scale, "Stable scale");
  c_sample->add_option("-n,--n", sample.n, "Number of draws");
  c_sample->add_option("--seed", sample.seed, "RNG seed");
  c_sample->add_option("-o,--out", sample.out, "Output path, - for stdout");

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Simulate an ensemble, write terminal states");
  c_sim->add_option("--config", sim.config, "JSON config (schema_version 1)");
  add_drift_options(c_sim, sim.drift);
  c_sim->add_option("--alpha", sim.alpha, "Stability index in (1, 2)");
  c_sim->add_option("--scheme", sim.scheme, "Increment scheme")->check(CLI::IsMember({"stable", "pareto", "exact_ou"}));
  c_sim->add_option("--eta", sim.eta, "Stepsize");
  c_sim->add_option("--steps", sim.steps, "Number of steps");
  c_sim->add_option("--n-traj", sim.n_traj, "Number of trajectories");
  c_sim->add_option("--seed", sim.seed, "RNG seed");
  c_sim->add_option("--x0", sim.x0, "Start point, comma separated")->delimiter(',');
  c_sim->add_option("-o,--out", sim.out, "Output path, - for stdout (CSV only)");
  c_sim->add_option("--format", sim.format, "csv or binary (binary needs --out)")->check(CLI::IsMember({"csv", "binary"}));

  ConvergeArgs conv;
  auto* c_conv = app.add_subcommand("converge", "Run a convergence study from a JSON config");
  c_conv->add_option("--config", conv.config, "Study config JSON")->required();
  c_conv->add_option("--csv", conv.csv, "Per-eta CSV path, - for stdout");
  c_conv->add_option("--fit", conv.fit, "Fit JSON path");

  ConstantsArgs cons;
  auto* c_cons = app.add_subcommand("constants", "Evaluate the theorem constants as JSON");
  add_drift_options(c_cons, cons.drift);
  c_cons->add_option("--alpha", cons.alpha, "Stability index in (1, 2)");
  c_cons->add_option("--eta", cons.eta, "Stepsize");
  c_cons->add_option("--x0", cons.x0, "Start point, comma separated")->delimiter(',');
  c_cons->add_option("--c2", cons.c2, "Semigroup-gradient constant C2 (default 10)");
  c_cons->add_option("-o,--out", cons.out, "Output path, - for stdout");

  OracleArgs orc;
  auto* c_orc = app.add_subcommand("oracle-ou", "Exact OU stationary-law comparison");
  c_orc->add_option("--alpha", orc.alpha, "Stability index in (1, 2)");
  c_orc->add_option("--eta", orc.eta, "Stepsize");
  c_orc->add_option("--invariant-n", orc.invariant_n, "Also run the sampled W1 check");
  c_orc->add_option("--seed", orc.seed, "RNG seed for --invariant-n");
  c_orc->add_option("-o,--out", orc.out, "Output path, - for stdout");

  AuditArgs aud;
  auto* c_aud = app.add_subcommand("audit", "Moment-bound and mixing audit from a JSON config");
  c_aud->add_option("--config", aud.config, "Audit config JSON")->required();
  c_aud->add_option("-o,--out", aud.out, "Output path, - for stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_failure({kExitConfig, "ConfigInvalid", e.what()});
    return kExitConfig;
  }
  if (threads > 0) setenv("HTEM_THREADS", std::to_string(threads).c_str(), 1);

  try {
    if (*c_sample) return run_sample(sample);
    if (*c_sim) return run_simulate(sim);
    if (*c_conv) return run_converge(conv);
    if (*c_cons) return run_constants(cons);
    if (*c_orc) return run_oracle(orc);
    if (*c_aud) return run_audit(aud);
  } catch (const CliFailure& f) {
    report_failure(f);
    return f.exit_code;
  } catch (const std::exception& e) {
    report_failure({kExitConfig, "Internal", e.what()});
    return kExitConfig;
  }
  return kExitConfig;
}
