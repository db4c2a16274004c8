#include <doctest.h>

#include <cmath>
#include <json.hpp>

#include "fixtures/goldens.hpp"
#include "helpers.hpp"
#include "htem/harness.hpp"
#include "htem/ledger.hpp"

using namespace htem;

TEST_CASE("OU oracle matches the multiprecision gap") {
  for (const auto& g : fixtures::kOu) {
    CAPTURE(g.alpha);
    CAPTURE(g.eta);
    const auto r = ou_oracle(g.alpha, g.eta);
    CHECK(testing::same_digits(r.P_exact, g.P, 13));
    CHECK(r.stationary_scale_Y - r.stationary_scale_X ==
          doctest::Approx(r.P_exact).epsilon(1e-12));
  }
  for (const auto& g : fixtures::kOuLimit) {
    const auto r = ou_oracle(g.alpha, 0.0);
    CHECK(testing::same_digits(r.first_order_coeff, g.limit, 14));
    CHECK(r.P_over_eta == r.first_order_coeff);
    // P/eta - limit shrinks linearly in eta.
    const double e1 = ou_oracle(g.alpha, 1e-3).P_over_eta - g.limit;
    const double e2 = ou_oracle(g.alpha, 1e-4).P_over_eta - g.limit;
    CHECK(e1 / e2 == doctest::Approx(10.0).epsilon(0.01));
  }
  CHECK(testing::error_code_of([] { ou_oracle(1.5, 1.0); }) == ErrorCode::Domain);
}

TEST_CASE("OU invariant-law W1 check") {
  const auto r = ou_invariant_w1_check(1.5, 0.0625, 20000, 3);
  CHECK(r.coupled_ok);
  // Independent samples sit on the empirical-W1 noise floor, far above |P| E|xi|
  // at this size; that is why the studies couple their ensembles.
  CHECK(r.w1_independent > r.bound);
  CHECK(r.bound == doctest::Approx(std::abs(r.P) * r.E_abs_xi));
}

TEST_CASE("log-log fit") {
  const std::vector<double> x{1, 2, 4, 8}, y{3, 6, 12, 24};
  const auto f = fit_log2(x, y);
  CHECK(f.slope == doctest::Approx(1.0));
  CHECK(f.intercept == doctest::Approx(std::log2(3.0)));
  CHECK(f.r_squared == doctest::Approx(1.0));
  CHECK(f.slope_std_error == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("study configs are strict and round-trip") {
  const auto s = ConvergenceStudy::from_json(
      R"({"schema_version":1,"scheme":"pareto","alpha":1.7,"eta_exponents":[4,6],
          "drift":{"kind":"sine","a":0.25},"n_traj":100,"repeats":2,"seed":9})");
  CHECK(s.scheme == Scheme::ParetoEM);
  CHECK(s.eta_grid == std::vector<double>{0.0625, 0.03125, 0.015625});
  CHECK(s.drift.kind == "sine");
  const auto back = ConvergenceStudy::from_json(s.to_json());
  CHECK(back.to_json() == s.to_json());
  CHECK(testing::error_code_of([] {
          ConvergenceStudy::from_json(R"({"schema_version":1,"n_trajs":5})");
        }) == ErrorCode::ConfigInvalid);
  CHECK(testing::error_code_of([] { ConvergenceStudy::from_json(R"({"scheme":"stable"})"); }) ==
        ErrorCode::ConfigInvalid);
  CHECK(testing::error_code_of([] { ConvergenceStudy::from_json("not json"); }) ==
        ErrorCode::ConfigInvalid);
  CHECK(ConvergenceStudy{}.eta_grid.size() == 6);
}

TEST_CASE("small convergence study is deterministic across thread counts") {
  ConvergenceStudy s;
  s.eta_grid = {0.0625, 0.03125};
  s.n_traj = 2000;
  s.repeats = 3;
  s.seed = 11;
  std::string first;
  for (int threads : {1, 8}) {
    testing::ThreadsGuard g(threads);
    const auto fit = run_convergence(s);
    CHECK(fit.per_eta.size() == 2);
    CHECK(fit.reference == "exact_ou");
    CHECK(fit.per_eta[0].n_steps == 160);
    CHECK(fit.per_eta[0].w1_repeats.size() == 3);
    CHECK(fit.dominance_ok);
    CHECK(fit.theory_slope == 1.0);
    if (first.empty()) first = fit.to_json() + fit.csv();
    else CHECK(first == fit.to_json() + fit.csv());
  }
}

TEST_CASE("study validation") {
  ConvergenceStudy s;
  s.n_traj = 10;
  s.eta_grid = {0.03125, 0.0625};
  CHECK(testing::error_code_of([&] { run_convergence(s); }) == ErrorCode::ConfigInvalid);
  s.eta_grid = {0.5};
  CHECK(testing::error_code_of([&] { run_convergence(s); }) == ErrorCode::ConfigInvalid);
}

TEST_CASE("sampled draws are independent of the worker count") {
  std::vector<double> a, b;
  {
    testing::ThreadsGuard g(1);
    a = sample_draws("stable", 1.5, 1.0, 10000, 4);
  }
  {
    testing::ThreadsGuard g(8);
    b = sample_draws("stable", 1.5, 1.0, 10000, 4);
  }
  CHECK(a == b);
  CHECK(testing::error_code_of([] { sample_draws("gauss", 1.5, 1.0, 10, 1); }) ==
        ErrorCode::ConfigInvalid);
}

TEST_CASE("audit of the OU drift passes at small scale") {
  AuditConfig c;
  c.n_traj = 4000;
  c.checkpoints = {10, 100};
  const auto r = run_ergodicity_audit(c);
  CHECK(r.moments_ok);
  CHECK(r.mixing_ok);
  CHECK(r.passed);
  CHECK_NOTHROW(require_audit_passed(r));
  for (const auto& m : r.moments) CHECK(m.margin > 0.0);
  const auto j = nlohmann::json::parse(r.to_json());
  CHECK(j.contains("contraction_informational"));
}

TEST_CASE("audit flags an understated bound") {
  AuditReport r;
  MomentCheck m;
  m.bound_name = "C4";
  m.k = 10;
  m.estimate = 5.0;
  m.bound = 1.0;
  m.margin = -4.0;
  r.moments.push_back(m);
  CHECK(testing::error_code_of([&] { require_audit_passed(r); }) == ErrorCode::BoundViolated);
}

TEST_CASE("audit configs") {
  const auto c = AuditConfig::from_json(
      R"({"schema_version":1,"scheme":"pareto","drift":{"kind":"tanh","dim":2},"eta":0.02})");
  CHECK(c.scheme == Scheme::ParetoEM);
  CHECK(c.drift.dim == 2);
  auto d = c;
  d.complete_defaults();
  CHECK(d.starts.size() == 2);
  CHECK(d.mix_y.size() == 2);
  CHECK(AuditConfig::from_json(d.to_json()).to_json() == d.to_json());
  CHECK(testing::error_code_of([] { AuditConfig::from_json(R"({"schema_version":2})"); }) ==
        ErrorCode::ConfigInvalid);
}

TEST_CASE("constants requests are strict") {
  const auto r = ConstantsRequest::from_json(
      R"({"alpha":1.7,"drift":{"kind":"sine","a":0.25},"eta":0.02,"C2_user":3})");
  CHECK(r.alpha == 1.7);
  CHECK(r.drift.a == 0.25);
  CHECK(*r.C2_user == 3.0);
  const auto L = r.evaluate();
  CHECK(L.script_C_prime.C2 == 3.0);
  CHECK(L.inputs.x0 == std::vector<double>{0.0});
  CHECK(testing::error_code_of([] { ConstantsRequest::from_json(R"({"alpha":1.5,"eta2":1})"); }) ==
        ErrorCode::ConfigInvalid);
  CHECK(testing::error_code_of([] {
          ConstantsRequest::from_json(R"({"drift":{"kind":"ou","thetta":2}})");
        }) == ErrorCode::ConfigInvalid);
  CHECK(testing::error_code_of([] { ConstantsRequest::from_json(R"({"alpha":"x"})"); }) ==
        ErrorCode::ConfigInvalid);
}
