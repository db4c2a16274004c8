// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance 2 5        run criteria 2 and 5
//   --out DIR             where study CSV/JSON files go (default: acceptance_out)
//   --quick               reduced trajectory counts for development; a quick run
//                         never reports PASS for criteria 2 and 3
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures/goldens.hpp"
#include "htem/fraclap.hpp"
#include "htem/harness.hpp"
#include "htem/ledger.hpp"
#include "htem/metrics.hpp"
#include "htem/parallel.hpp"
#include "htem/rng.hpp"
#include "htem/stable.hpp"

#ifndef HTEM_CLI_PATH
#error "HTEM_CLI_PATH must name the htem executable"
#endif

namespace fs = std::filesystem;
using namespace htem;

namespace {

bool g_quick = false;
fs::path g_out = "acceptance_out";

struct Outcome {
  bool pass = false;
  std::string summary;
};

void note(const std::string& line) { std::cout << "    " << line << '\n' << std::flush; }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

struct CommandResult {
  int status = -1;
  std::string out;
};

CommandResult run(const std::string& cmd) {
  CommandResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf;
  std::size_t got;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  const int st = pclose(pipe);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string cli() { return std::string("'") + HTEM_CLI_PATH + "'"; }

bool same_digits(double a, double b, int digits) {
  if (a == b) return true;
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b)) <= 0.5 * std::pow(10.0, 1 - digits);
}

// --- 1. OU oracle ------------------------------------------------------------

Outcome criterion_1() {
  const double alpha = 1.5;
  bool digits_ok = true;
  double total_seconds = 0.0;
  std::vector<double> etas, over;
  for (const auto& g : fixtures::kOu) {
    if (g.alpha != alpha || (g.eta != 1e-2 && g.eta != 1e-3 && g.eta != 1e-4)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = run(cli() + " oracle-ou --alpha 1.5 --eta " + fmt("%.17g", g.eta));
    total_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (r.status != 0) {
      note("oracle-ou exited with status " + std::to_string(r.status));
      return {false, "oracle-ou failed to run"};
    }
    const auto j = nlohmann::json::parse(r.out);
    const double P = j["P_exact"].get<double>();
    const bool ok = same_digits(P, g.P, 12);
    digits_ok = digits_ok && ok;
    etas.push_back(g.eta);
    over.push_back(j["P_over_eta"].get<double>());
    note("eta " + fmt("%.0e", g.eta) + ": P = " + fmt("%.17g", P) + ", oracle " +
         fmt("%.15e", g.P) + (ok ? " (12 digits agree)" : " (MISMATCH)"));
  }
  const double s = std::pow(1.0 / alpha, 1.0 / alpha);
  const double printed = s * (alpha + 1.0) / (2.0 * alpha);
  const double actual = s * (alpha - 1.0) / (2.0 * alpha);
  // First-order error: (P/eta - limit) / eta should be roughly constant.
  std::vector<double> ratio_printed, ratio_actual;
  for (std::size_t i = 0; i < etas.size(); ++i) {
    ratio_printed.push_back((over[i] - printed) / etas[i]);
    ratio_actual.push_back((over[i] - actual) / etas[i]);
  }
  auto spread = [](const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return (*hi - *lo) / std::max(std::abs(*hi), std::abs(*lo));
  };
  const bool printed_limit_ok = std::abs(over.back() - printed) < 1e-3 * printed &&
                                spread(ratio_printed) < 0.05;
  const bool actual_limit_ok = std::abs(over.back() - actual) < 1e-3 * actual &&
                               spread(ratio_actual) < 0.05;
  note("P/eta at eta 1e-4: " + fmt("%.15f", over.back()));
  note("stated limit (1/a)^(1/a)(a+1)/(2a) = " + fmt("%.15f", printed) +
       (printed_limit_ok ? " (reached)" : " (NOT reached)"));
  note("(1/a)^(1/a)(a-1)/(2a) = " + fmt("%.15f", actual) +
       (actual_limit_ok ? " is the limit, with (P/eta - limit)/eta ~ " +
                              fmt("%.6f", ratio_actual.back())
                        : " not reached either"));
  note("three CLI calls took " + fmt("%.3f", total_seconds) + " s");
  const bool pass = digits_ok && printed_limit_ok && total_seconds < 3.0;
  std::string summary = std::string("P to 12 digits: ") + (digits_ok ? "yes" : "no") +
                        "; P/eta -> (1/a)^(1/a)(a+1)/(2a): " + (printed_limit_ok ? "yes" : "no");
  if (!printed_limit_ok && actual_limit_ok)
    summary += " (the limit is (1/a)^(1/a)(a-1)/(2a) = " + fmt("%.6f", actual) + ")";
  return {pass, summary};
}

// --- 2 and 3. Convergence rates ---------------------------------------------

RateFit study(Scheme scheme, double alpha) {
  ConvergenceStudy s;
  s.scheme = scheme;
  s.alpha = alpha;
  s.seed = 1;
  if (g_quick) {
    s.n_traj = 20000;
    s.repeats = 4;
  }
  const std::string tag = std::string(scheme_name(scheme)) + "_alpha" + fmt("%.1f", alpha);
  const auto t0 = std::chrono::steady_clock::now();
  const RateFit fit = run_convergence(s, [](const std::string& line) {
    std::cerr << "      " << line << '\n';
  });
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_file(g_out / (tag + ".csv"), fit.csv());
  write_file(g_out / (tag + ".json"), fit.to_json() + "\n");
  note(tag + ": slope " + fmt("%.4f", fit.slope) + " +- " + fmt("%.4f", fit.slope_std_error) +
       " (theory " + fmt("%.4f", fit.theory_slope) + "), bounds " +
       (fit.dominance_ok ? "hold" : "VIOLATED") + ", monotone " +
       (fit.monotone_ok ? "yes" : "no") + ", " + fmt("%.0f", secs) + " s, reference " +
       fit.reference);
  for (const auto& r : fit.per_eta)
    note("  eta " + fmt("%-12.9g", r.eta) + " W1 median " + fmt("%.6e", r.w1_median) + "  IQR " +
         fmt("%.2e", r.w1_iqr) + "  bound " + fmt("%.4e", r.bound));
  for (const auto& w : fit.warnings) note("  warning: " + w);
  return fit;
}

Outcome criterion_2() {
  bool pass = true;
  std::string summary;
  for (double alpha : {1.3, 1.5, 1.7}) {
    const RateFit f = study(Scheme::StableEM, alpha);
    const bool ok = f.slope >= 0.85 && f.slope <= 1.15 && f.dominance_ok;
    pass = pass && ok;
    summary += (summary.empty() ? "" : ", ") + std::string("alpha ") + fmt("%.1f", alpha) +
               " slope " + fmt("%.3f", f.slope) + (f.dominance_ok ? "" : " bound violated");
  }
  summary += " (target [0.85, 1.15], W1 <= C eta)";
  if (g_quick) return {false, "quick mode, not the protocol: " + summary};
  return {pass, summary};
}

Outcome criterion_3() {
  std::map<double, RateFit> fits;
  for (double alpha : {1.3, 1.5, 1.7}) fits.emplace(alpha, study(Scheme::ParetoEM, alpha));
  const double s13 = fits.at(1.3).slope, s15 = fits.at(1.5).slope, s17 = fits.at(1.7).slope;
  const bool in_band = s15 >= 0.18 && s15 <= 0.48;
  const bool ordered = s17 < s13;
  bool bounds = true;
  for (const auto& [a, f] : fits) bounds = bounds && f.dominance_ok;
  const std::string summary = "alpha 1.5 slope " + fmt("%.3f", s15) + " (target [0.18, 0.48])" +
                              ", slope(1.7) " + fmt("%.3f", s17) + " < slope(1.3) " +
                              fmt("%.3f", s13) + (ordered ? "" : " FAILS") +
                              (bounds ? ", W1 <= C' eta^(2/a-1)" : ", bound violated");
  if (g_quick) return {false, "quick mode, not the protocol: " + summary};
  return {in_band && ordered && bounds, summary};
}

// --- 4. Samplers --------------------------------------------------------------

Outcome criterion_4() {
  const std::size_t n = 1000000;
  bool pass = true;
  int checks = 0, misses = 0;
  for (double alpha : {1.3, 1.5, 1.7}) {
    const auto x = sample_draws("stable", alpha, 1.0, n, 101);
    const auto mu = EmpiricalMeasure::from_1d(x);
    for (double u : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      const auto cf = empirical_cf(mu, {u});
      const double phi = std::exp(-std::pow(u, alpha));
      const double phi2 = std::exp(-std::pow(2 * u, alpha));
      const double se_re = std::sqrt(((1 + phi2) / 2 - phi * phi) / n);
      const double se_im = std::sqrt((1 - phi2) / 2 / n);
      const double z_re = (cf.real() - phi) / se_re, z_im = cf.imag() / se_im;
      checks += 2;
      const bool ok = std::abs(z_re) <= 3 && std::abs(z_im) <= 3;
      misses += !ok;
      pass = pass && ok;
      note("stable a=" + fmt("%.1f", alpha) + " u=" + fmt("%-4g", u) + " Re " +
           fmt("%.6f", cf.real()) + " vs " + fmt("%.6f", phi) + " (z " + fmt("%+.2f", z_re) +
           "), Im z " + fmt("%+.2f", z_im));
    }
    const auto z = sample_draws("pareto", alpha, 1.0, n, 202);
    for (double level : {2.0, 10.0}) {
      const double p = std::pow(level, -alpha);
      const double frac =
          static_cast<double>(std::count_if(z.begin(), z.end(),
                                            [&](double v) { return std::abs(v) > level; })) / n;
      const double se = std::sqrt(p * (1 - p) / n);
      const bool ok = std::abs(frac - p) <= 3 * se;
      ++checks;
      misses += !ok;
      pass = pass && ok;
      note("pareto a=" + fmt("%.1f", alpha) + " P(|Z|>" + fmt("%g", level) + ") " +
           fmt("%.6f", frac) + " vs " + fmt("%.6f", p) + " (z " + fmt("%+.2f", (frac - p) / se) +
           ")");
    }
  }
  // Normalised Pareto sums n^(-1/a) sigma^(-1) sum zeta_i approach the stable law.
  const double alpha = 1.5;
  const StableSpec spec(alpha, 1);
  const std::size_t m = 100000;
  const std::vector<double> us{0.5, 1.0, 2.0};
  std::vector<double> dist;
  std::vector<double> se;
  for (std::size_t terms : {100u, 1000u, 10000u}) {
    std::vector<double> sums(m);
    const double scale = std::pow(static_cast<double>(terms), -1.0 / alpha) / spec.sigma();
    parallel_for(m, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        RngStream s(derive_seed(303, terms), i);
        double acc = 0.0;
        for (std::size_t k = 0; k < terms; ++k) acc += sample_pareto_1d(s, alpha);
        sums[i] = scale * acc;
      }
    });
    const auto mu = EmpiricalMeasure::from_1d(sums);
    double worst = 0.0;
    for (double u : us)
      worst = std::max(worst, std::abs(empirical_cf(mu, {u}) - std::exp(-std::pow(u, alpha))));
    dist.push_back(worst);
    se.push_back(1.0 / std::sqrt(2.0 * m));
    note("pareto sum n=" + std::to_string(terms) + ": max_u |cf - exp(-|u|^a)| = " +
         fmt("%.5f", worst));
  }
  const bool converging = dist[0] > dist[1] && dist[1] > dist[2] &&
                          dist[0] - dist[2] > 3 * (se[0] + se[2]);
  pass = pass && converging;
  return {pass, std::to_string(checks - misses) + "/" + std::to_string(checks) +
                    " CF and tail checks within 3 SE; Pareto-sum CF distance " +
                    fmt("%.4f", dist[0]) + " -> " + fmt("%.4f", dist[1]) + " -> " +
                    fmt("%.4f", dist[2])};
}

// --- 5. Fractional Laplacian -------------------------------------------------

Outcome criterion_5() {
  double worst = 0.0, worst_linear = 0.0;
  for (double alpha : {1.2, 1.5, 1.8}) {
    const StableSpec spec(alpha, 1);
    for (double u : {0.5, 1.0, 2.0, 3.0}) {
      TailBound tail;
      tail.lipschitz = u;
      tail.second_difference = 4.0;
      const auto r =
          frac_laplacian_1d([u](double x) { return std::cos(u * x); }, 0.0, spec, {}, tail);
      const double err = std::abs(r.value + std::pow(u, alpha));
      worst = std::max(worst, err);
      note("a=" + fmt("%.1f", alpha) + " u=" + fmt("%.1f", u) + ": " + fmt("%.10f", r.value) +
           " vs " + fmt("%.10f", -std::pow(u, alpha)) + " (error " + fmt("%.2e", err) +
           ", estimate " + fmt("%.2e", r.error_estimate) + ")");
    }
    TailBound lin;
    lin.second_difference = 0.0;
    for (double x : {0.0, 0.7, -3.0}) {
      const auto r = frac_laplacian_1d([](double y) { return 1.5 - 2.0 * y; }, x, spec, {}, lin);
      worst_linear = std::max(worst_linear, std::abs(r.value));
    }
  }
  return {worst <= 1e-3 && worst_linear <= 1e-10,
          "cosine symbol error <= " + fmt("%.2e", worst) + " on 12 points (target 1e-3), " +
              "linear |value| <= " + fmt("%.2e", worst_linear) + " (target 1e-10)"};
}

// --- 6. Ledger ----------------------------------------------------------------

Outcome criterion_6() {
  int fields = 0, agree = 0;
  for (const auto& g : fixtures::kLedger) {
    LedgerInputs in;
    in.drift_name = g.name;
    in.alpha = g.alpha;
    in.dim = g.dim;
    in.drift = {g.theta1, g.theta2, g.theta3, g.theta4, g.K, g.b0_norm};
    in.x0.assign(g.x0.begin(), g.x0.begin() + g.dim);
    in.eta = g.eta;
    in.C2_user = g.C2;
    in.frac_lapl_b0 = g.frac_lapl_b0;
    const auto L = build_ledger(in);
    const std::vector<std::pair<double, double>> pairs{
        {L.p_alpha, g.p_alpha}, {L.sigma, g.sigma}, {L.coupling.L0, g.L0},
        {L.coupling.c1, g.c1}, {L.coupling.C5, g.C5}, {L.coupling.decay_factor, g.decay_factor},
        {L.coupling.decay_ratio, g.decay_ratio}, {L.C3_1, g.C3_1}, {L.C4_1, g.C4_1},
        {L.C7, g.C7}, {L.E_abs_L1, g.E_abs_L1},
        {L.E_abs_L1_pow_2_minus_alpha, g.E_abs_L1_pow_2_minus_alpha},
        {L.script_C.value, g.script_C}, {L.script_C_prime.value, g.script_C_prime}};
    for (const auto& [mine, gold] : pairs) {
      ++fields;
      // The evaluator's K -> 0 limits are ~1e-100 where the library reports 0.
      const bool ok = same_digits(mine, gold, 12) || (mine == 0.0 && std::abs(gold) < 1e-60);
      agree += ok;
      if (!ok) note(std::string(g.name) + ": " + fmt("%.17g", mine) + " vs " + fmt("%.15e", gold));
    }
  }
  note(std::to_string(agree) + "/" + std::to_string(fields) + " ledger values agree to 12 digits");

  bool audits_ok = true;
  std::string failed;
  for (const char* kind : {"ou", "sine", "tanh"}) {
    for (Scheme scheme : {Scheme::StableEM, Scheme::ParetoEM}) {
      AuditConfig c;
      c.drift.kind = kind;
      c.scheme = scheme;
      const auto t0 = std::chrono::steady_clock::now();
      const AuditReport r = run_ergodicity_audit(c);
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const std::string tag = std::string("audit_") + kind + "_" + scheme_name(scheme);
      write_file(g_out / (tag + ".json"), r.to_json() + "\n");
      double min_margin = HUGE_VAL;
      std::set<std::string> names;
      for (const auto& m : r.moments) {
        min_margin = std::min(min_margin, m.margin / m.bound);
        names.insert(m.bound_name);
      }
      std::string which;
      for (const auto& nme : names) which += (which.empty() ? "" : "+") + nme;
      note(tag + ": " + std::to_string(r.moments.size()) + " checkpoints (" + which +
           "), moments " + (r.moments_ok ? "dominated" : "VIOLATED") + ", smallest relative margin " +
           fmt("%.3f", min_margin) + ", mixing " + (r.mixing_ok ? "yes" : "no") + ", " +
           fmt("%.0f", secs) + " s");
      if (!r.moments_ok) {
        audits_ok = false;
        failed += " " + tag;
      }
    }
  }
  return {agree == fields && audits_ok,
          std::to_string(agree) + "/" + std::to_string(fields) +
              " golden values to 12 digits; C3/C4/C7 audits " +
              (audits_ok ? "pass for ou, sine, tanh" : "fail:" + failed)};
}

// --- 7. W1 estimator ---------------------------------------------------------

Outcome criterion_7() {
  RngStream s(707, 0);
  double worst = 0.0;
  for (int inst = 0; inst < 1000; ++inst) {
    const std::size_t n = 1 + static_cast<std::size_t>(s.uniform() * 8);
    std::vector<double> x(n), y(n);
    for (auto& v : x) v = sample_stable_1d(s, 1.5, 1.0);
    for (auto& v : y) v = sample_stable_1d(s, 1.5, 1.0);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = HUGE_VAL;
    do {
      double cost = 0.0;
      for (std::size_t i = 0; i < n; ++i) cost += std::abs(x[i] - y[perm[i]]);
      best = std::min(best, cost / static_cast<double>(n));
    } while (std::next_permutation(perm.begin(), perm.end()));
    worst = std::max(worst, std::abs(w1_1d(x, y) - best));
  }
  return {worst <= 1e-12, "1000 instances with n <= 8, largest |sorted - brute force| = " +
                              fmt("%.2e", worst)};
}

// --- 8. Determinism ------------------------------------------------------------

Outcome criterion_8() {
  const fs::path dir = g_out / "determinism";
  fs::create_directories(dir);
  write_file(dir / "converge.json",
             R"({"schema_version":1,"scheme":"pareto","drift":{"kind":"tanh"},"alpha":1.6,)"
             R"("eta_grid":[0.0625,0.03125],"n_traj":3000,"repeats":3,"seed":5})"
             "\n");
  write_file(dir / "converge_ou.json",
             R"({"schema_version":1,"scheme":"stable","alpha":1.4,"eta_exponents":[4,6],)"
             R"("n_traj":3000,"repeats":3,"seed":6})"
             "\n");
  write_file(dir / "audit.json",
             R"({"schema_version":1,"scheme":"stable","drift":{"kind":"sine","a":0.5},)"
             R"("checkpoints":[10,100],"n_traj":3000,"seed":8})"
             "\n");
  write_file(dir / "simulate.json",
             R"({"schema_version":1,"drift":{"kind":"tanh","dim":2},"scheme":"pareto",)"
             R"("alpha":1.5,"eta":0.05,"n_steps":40,"n_traj":2000,"seed":9,"x0":[1,-1]})"
             "\n");
  struct Case {
    std::string name, args, file;  // file: output path pattern, empty = stdout
  };
  const std::string d = "'" + dir.string() + "'";
  const std::vector<Case> cases{
      {"sample", "sample --kind stable --alpha 1.5 --n 50000 --seed 3", ""},
      {"sample-pareto", "sample --kind pareto --alpha 1.7 --n 50000 --seed 3", ""},
      {"simulate-csv",
       "simulate --drift sine --alpha 1.3 --scheme stable --eta 0.01 --steps 200 --n-traj 5000 "
       "--seed 4",
       ""},
      {"simulate-binary", "simulate --config " + d + "/simulate.json --format binary --out @",
       "@"},
      {"converge", "converge --config " + d + "/converge.json --fit @", "@"},
      {"converge-ou", "converge --config " + d + "/converge_ou.json", ""},
      {"constants", "constants --drift tanh --alpha 1.4 --eta 0.02", ""},
      {"oracle-ou", "oracle-ou --alpha 1.5 --eta 0.01 --invariant-n 20000 --seed 2", ""},
      {"audit", "audit --config " + d + "/audit.json", ""},
  };
  bool pass = true;
  int identical = 0;
  for (const auto& c : cases) {
    std::vector<std::string> outputs;
    for (int threads : {1, 8}) {
      for (int rep = 0; rep < 2; ++rep) {
        std::string args = c.args;
        std::string path;
        if (!c.file.empty()) {
          path = (dir / (c.name + "_t" + std::to_string(threads) + "_" + std::to_string(rep)))
                     .string();
          args.replace(args.find('@'), 1, "'" + path + "'");
        }
        const auto r = run(cli() + " --threads " + std::to_string(threads) + " " + args);
        if (r.status != 0) {
          note(c.name + ": exit status " + std::to_string(r.status));
          pass = false;
        }
        outputs.push_back(r.out + (path.empty() ? "" : read_file(path)));
      }
    }
    const bool same = std::all_of(outputs.begin(), outputs.end(),
                                  [&](const std::string& o) { return o == outputs[0]; });
    identical += same;
    pass = pass && same && !outputs[0].empty();
    note(c.name + ": " + std::to_string(outputs[0].size()) + " bytes, " +
         (same ? "identical across 4 runs (threads 1, 8)" : "OUTPUTS DIFFER"));
  }
  return {pass, std::to_string(identical) + "/" + std::to_string(cases.size()) +
                    " subcommand configurations byte-identical across runs and thread counts"};
}

const std::map<int, std::pair<const char*, std::function<Outcome()>>>& criteria() {
  static const std::map<int, std::pair<const char*, std::function<Outcome()>>> c{
      {1, {"OU oracle exactness", criterion_1}},
      {2, {"stable-scheme rate", criterion_2}},
      {3, {"Pareto-scheme rate", criterion_3}},
      {4, {"sampler validation", criterion_4}},
      {5, {"fractional-Laplacian symbol suite", criterion_5}},
      {6, {"constant-ledger goldens and moment audits", criterion_6}},
      {7, {"W1 estimator correctness", criterion_7}},
      {8, {"determinism", criterion_8}},
  };
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> chosen;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--quick") {
      g_quick = true;
    } else if (a == "--out" && i + 1 < argc) {
      g_out = argv[++i];
    } else if (!a.empty() && std::all_of(a.begin(), a.end(), ::isdigit)) {
      chosen.push_back(std::stoi(a));
    } else {
      std::cerr << "usage: acceptance [--quick] [--out DIR] [criterion ...]\n";
      return 64;
    }
  }
  if (chosen.empty())
    for (const auto& [k, v] : criteria()) chosen.push_back(k);
  fs::create_directories(g_out);
  std::cout << "workers: " << worker_count() << '\n';

  std::vector<std::string> lines;
  bool all = true;
  for (int k : chosen) {
    const auto it = criteria().find(k);
    if (it == criteria().end()) {
      std::cerr << "no criterion " << k << '\n';
      return 64;
    }
    std::cout << "criterion " << k << ": " << it->second.first << '\n' << std::flush;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const std::string line = std::string(o.pass ? "PASS" : "FAIL") + "  criterion " +
                             std::to_string(k) + " (" + it->second.first + "): " + o.summary +
                             " [" + fmt("%.1f", secs) + " s]";
    std::cout << line << "\n\n" << std::flush;
    lines.push_back(line);
    all = all && o.pass;
  }
  std::cout << "summary\n";
  for (const auto& l : lines) std::cout << l << '\n';
  return all ? 0 : 1;
}
