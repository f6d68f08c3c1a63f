#include <doctest.h>

#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "phaseless/bounds.hpp"
#include "phaseless/error.hpp"
#include "support.hpp"

using namespace phaseless;
using testing_support::kPi;

TEST_CASE("c1 for d = 2, sigma = 4 is sqrt(pi)") {
  CHECK(c1(2, 4) == doctest::Approx(std::sqrt(kPi)).epsilon(1e-12));
  CHECK(c1_closed_form(2, 4) == doctest::Approx(std::sqrt(kPi)).epsilon(1e-14));
}

TEST_CASE("c1 quadrature agrees with the closed form") {
  for (int d : {2, 3}) {
    for (double s : {d + 1.0, d + 2.0, 2.0 * d}) {
      CHECK(std::abs(c1(d, s) / c1_closed_form(d, s) - 1) < 1e-8);
    }
  }
}

TEST_CASE("c1 against an independent finite-interval quadrature for d = 3, sigma = 5") {
  // x = tan t maps [0, inf) to [0, pi/2): 4 pi tan^2 t sec^2 t cos^5 t.
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double v = GK::integrate(
      [](double t) { return 4 * kPi * std::pow(std::sin(t), 2) * std::cos(t); }, 0.0, kPi / 2, 0, 1e-14);
  CHECK(c1(3, 5) == doctest::Approx(std::sqrt(v)).epsilon(1e-10));
}

TEST_CASE("c1 decreases with sigma and diverges at sigma <= d") {
  double prev = c1(2, 2.5);
  for (double s = 3.0; s < 20; s += 0.5) {
    const double c = c1(2, s);
    CHECK(c < prev);
    prev = c;
  }
  try {
    c1(3, 3);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDivergentIntegral);
  }
}

TEST_CASE("c2 examples") {
  CHECK(c2({{{0, 0, 0}, 1.0}}, 4) == doctest::Approx(4.0));
  CHECK(c2({{{2, 0, 0}, 0.5}}, 2) == doctest::Approx(7.25));
  CHECK(c2({{{2, 0, 0}, 0.5}, {{0, -3, 0}, 1.0}}, 2) == doctest::Approx(17.0));
  CHECK(c2({{{5, 1, 0}, 2.0}}, 0) == 1.0);
  CHECK_THROWS_AS(c2({}, 2), Error);
}

TEST_CASE("rho1 and the decay constant") {
  CHECK(rho1(1.0, 0.2) == 1.0);
  CHECK(rho1(2.0, 1.5) == 6.0);
  const std::vector<SupportBall> d{{{0, 0, 0}, 1.0}};
  const double want = 6 * std::pow(2 * kPi, -4) * 1.5 * std::pow(kPi, 2) * 64.0;
  CHECK(decay_constant(2, 4, 1.5, d) == doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("fit_decay recovers exact power laws") {
  const std::vector<double> e{25, 50, 100, 200, 400};
  std::vector<double> a, b;
  for (double x : e) {
    a.push_back(std::pow(x, -0.5));
    b.push_back(3.0 / x);
  }
  CHECK(std::abs(fit_decay(e, a).slope + 0.5) < 1e-12);
  CHECK(std::abs(fit_decay(e, a).intercept) < 1e-12);
  CHECK(std::abs(fit_decay(e, b).slope + 1.0) < 1e-12);
  CHECK(fit_decay(e, b).intercept == doctest::Approx(std::log(3.0)));
}

TEST_CASE("property: fit_decay slope is invariant under error scaling") {
  const std::vector<double> e{10, 20, 35, 80, 160, 300};
  const std::vector<double> err{0.4, 0.31, 0.2, 0.15, 0.09, 0.07};
  const DecayFit base = fit_decay(e, err);
  for (double s : {1e-6, 0.37, 42.0, 1e8}) {
    std::vector<double> scaled;
    for (double x : err) scaled.push_back(s * x);
    const DecayFit f = fit_decay(e, scaled);
    CHECK(std::abs(f.slope - base.slope) < 1e-12);
    CHECK(f.intercept == doctest::Approx(base.intercept + std::log(s)));
  }
}

TEST_CASE("fit_decay rejects degenerate inputs") {
  const std::vector<double> e3{1, 2, 3}, err3{1, 1, 1};
  CHECK_THROWS_AS(fit_decay(e3, err3), Error);
  const std::vector<double> e4{1, 2, 3, 4};
  CHECK_THROWS_AS(fit_decay(e4, std::vector<double>{1, 0, 1, 1}), Error);
  CHECK_THROWS_AS(fit_decay(std::vector<double>{1, 3, 2, 4}, std::vector<double>{1, 1, 1, 1}), Error);
}

TEST_CASE("constants report serializes every constant") {
  const auto r = constants_report(2, 4, 1.0, {{{0, 0, 0}, 1.0}}, {1.0, 2.0});
  const auto j = r.to_json();
  CHECK(j["c1"].get<double>() == doctest::Approx(std::sqrt(kPi)));
  CHECK(j["c2"].get<double>() == doctest::Approx(4.0));
  CHECK(j["sup_norms"].size() == 2);
}

TEST_CASE("a small decay experiment produces one row per energy and a fit") {
  DecayExperiment exp;
  exp.potential.components.push_back(Ball{{0, 0, 0}, 0.5, 1.0});
  exp.grid.n = 32;
  exp.grid.box_min = {-1, -1, 0};
  exp.grid.box_max = {1, 1, 0};
  exp.energies = {16, 25, 36, 49};
  exp.workers = 2;
  const auto r = run_decay_experiment(exp, 4, 1.0);
  REQUIRE(r.rows.size() == 4);
  for (const auto& row : r.rows) {
    CHECK(row.error > 0);
    CHECK(std::isfinite(row.error_analytic));
    CHECK(row.channels > 0);
    CHECK(row.max_residual <= exp.solver.tolerance);
  }
  REQUIRE(r.fit);
  CHECK(std::isfinite(r.fit->slope));
}
