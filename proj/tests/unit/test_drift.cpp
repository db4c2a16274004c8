#include <doctest.h>

#include <cmath>
#include <vector>

#include "fixtures/goldens.hpp"
#include "helpers.hpp"
#include "htem/drift.hpp"
#include "htem/rng.hpp"

using namespace htem;

TEST_CASE("shipped drifts evaluate componentwise") {
  const auto ou = DriftModel::ou(2.0, 2);
  CHECK(ou({1.0, -3.0}) == std::vector<double>{-2.0, 6.0});
  const auto sine = DriftModel::sine_perturbed(0.5, 1);
  CHECK(sine({1.0})[0] == doctest::Approx(-1.0 + 0.5 * std::sin(1.0)).epsilon(1e-15));
  const auto th = DriftModel::tanh_distant(3);
  const auto v = th({0.5, -0.5, 4.0});
  CHECK(v[0] == doctest::Approx(-0.5 + 2 * std::tanh(0.5)).epsilon(1e-15));
  CHECK(v[1] == -v[0]);
}

TEST_CASE("declared constants") {
  const auto ou = DriftModel::ou(1.5, 1);
  CHECK(ou.params().theta1 == 1.5);
  CHECK(ou.params().theta4 == 1.5);
  CHECK(ou.params().K == 0.0);
  const auto sine = DriftModel::sine_perturbed(0.25, 1);
  CHECK(sine.params().theta1 == 1.25);
  CHECK(sine.params().theta4 == 0.75);
  const auto th = DriftModel::tanh_distant(2);
  CHECK(th.params().K == 16.0);
  CHECK(th.params().theta4 == 0.5);
  CHECK(th.params().theta2 ==
        doctest::Approx(2 * fixtures::kMaxTanhSecondDerivative).epsilon(1e-14));
  CHECK(th.L0() == doctest::Approx(8.0));
}

TEST_CASE("shipped drifts pass certification") {
  for (std::size_t d : {1u, 2u, 4u}) {
    for (const auto& m : {DriftModel::ou(1.0, d), DriftModel::sine_perturbed(0.5, d),
                          DriftModel::tanh_distant(d)}) {
      CAPTURE(m.name());
      const auto r = certify(m, 4000, 30.0, 3);
      CHECK(r.passed);
      CHECK(r.worst_dissipativity_slack <= 1e-6);
      CHECK(r.max_jacobian_norm <= m.params().theta1 + 1e-6);
    }
  }
}

TEST_CASE("certification finds understated constants") {
  const auto ou = DriftModel::ou(1.0, 1);
  DriftParams lie = ou.params();
  lie.theta1 = 0.5;
  const auto r = certify(ou.with_params(lie), 2000, 10.0, 1);
  CHECK_FALSE(r.passed);
  CHECK_FALSE(r.jacobian_ok);
  CHECK(r.jacobian_witness.size() == 1);

  const auto th = DriftModel::tanh_distant(1);
  DriftParams no_k = th.params();
  no_k.K = 0.0;
  const auto r2 = certify(th.with_params(no_k), 2000, 10.0, 1);
  CHECK_FALSE(r2.dissipativity_ok);
  CHECK(r2.worst_dissipativity_slack > 0.0);
}

TEST_CASE("custom drifts are certified on construction") {
  auto fn = [](std::span<const double> x, std::span<double> out) {
    out[0] = -2.0 * x[0] + 0.5 * x[1];
    out[1] = -0.5 * x[0] - 2.0 * x[1] + 1.0;
  };
  DriftParams ok{2.1, 0.0, 0.0, 2.0, 0.0, 0.0};
  const auto m = DriftModel::custom("rot", 2, fn, ok, 0.0);
  CHECK(m.params().b0_norm == doctest::Approx(1.0));
  CHECK_FALSE(m.separable());
  DriftParams bad{1.0, 0.0, 0.0, 2.0, 0.0, 0.0};
  CHECK(testing::error_code_of([&] { DriftModel::custom("rot", 2, fn, bad); }) ==
        ErrorCode::BoundViolated);
}

TEST_CASE("drift families validate their parameters") {
  CHECK(testing::error_code_of([] { DriftModel::ou(0.0, 1); }) == ErrorCode::Domain);
  CHECK(testing::error_code_of([] { DriftModel::sine_perturbed(1.0, 1); }) == ErrorCode::Domain);
  CHECK(testing::error_code_of([] { DriftModel::tanh_distant(0); }) == ErrorCode::Domain);
  const auto ou = DriftModel::ou(1.0, 2);
  CHECK(testing::error_code_of([&] { ou({1.0}); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("dissipativity holds on random pairs (property)") {
  // <b(x)-b(y), x-y> <= -theta4 |x-y|^2 + K for the shipped families.
  RngStream s(77, 0);
  for (const auto& m : {DriftModel::sine_perturbed(0.9, 1), DriftModel::tanh_distant(1)}) {
    const auto& p = m.params();
    for (int i = 0; i < 20000; ++i) {
      const double x = 40 * (s.uniform() - 0.5), y = 40 * (s.uniform() - 0.5);
      const double lhs = (m.phi(x) - m.phi(y)) * (x - y);
      REQUIRE(lhs <= -p.theta4 * (x - y) * (x - y) + p.K + 1e-9);
    }
  }
}
