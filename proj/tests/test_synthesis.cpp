#include <doctest.h>

#include <cmath>

#include "phaseless/dataset_io.hpp"
#include "phaseless/error.hpp"
#include "phaseless/synthesis.hpp"
#include "support.hpp"

using namespace phaseless;
using testing_support::kPi;

namespace {

GridSpec square(int n, double half) {
  GridSpec g;
  g.n = n;
  g.box_min = {-half, -half, 0};
  g.box_max = {half, half, 0};
  return g;
}

PotentialSpec disc(Vec c, double r, cplx a = 1.0) {
  PotentialSpec s;
  s.components.push_back(Ball{c, r, a});
  return s;
}

BackgroundSet two_refs() {
  return {{disc({1.2137, 0.4071, 0}, 0.3), disc({-0.6113, 1.1029, 0}, 0.25, 2.0)}};
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("Born-oracle values are the squared moduli of the closed-form transforms") {
  const GridSpec g = square(64, 2.0);
  const auto v = disc({0.1, -0.2, 0}, 0.4, {1.0, 0.3});
  const auto bg = two_refs();
  const auto ds = synthesize(v, bg, {25, 100}, g);
  CHECK(ds.references == 2);
  CHECK_NOTHROW(ds.validate());
  std::size_t checked = 0;
  for (const auto& r : ds.records) {
    const Vec& p = r.channel.p;
    CHECK(r.values[0] == std::norm(analytic_hat(v, p)));
    CHECK(r.values[1] == std::norm(analytic_hat(superpose(v, bg.backgrounds[0]), p)));
    CHECK(r.values[2] == std::norm(analytic_hat(superpose(v, bg.backgrounds[1]), p)));
    CHECK(r.flags == 0u);
    ++checked;
  }
  const GridSpec pg = g.dual();
  std::size_t expected = 0;
  for (double e : {25.0, 100.0})
    for (std::size_t i = 0; i < pg.size(); ++i) expected += norm(pg.node(i)) <= 2 * std::sqrt(e);
  CHECK(checked == expected);
}

TEST_CASE("empty v gives the backgrounds' own data and zero |f|^2") {
  const auto bg = two_refs();
  const auto ds = synthesize(PotentialSpec{}, bg, {25}, square(32, 2.0));
  for (const auto& r : ds.records) {
    CHECK(r.values[0] == 0.0);
    CHECK(r.values[1] == std::norm(analytic_hat(bg.backgrounds[0], r.channel.p)));
  }
}

TEST_CASE("discarding a unit phase leaves the data bit-identical") {
  const GridSpec g = square(32, 2.0);
  const auto v = disc({0.1, 0.0, 0}, 0.4, {1.0, 0.7});
  const auto ref = synthesize(v, two_refs(), {25}, g);
  for (cplx hook : {cplx{0, 1}, cplx{-1, 0}, cplx{0, -1}}) {
    const auto ds = synthesize(v, two_refs(), {25}, g, {.phase_hook = hook});
    for (std::size_t i = 0; i < ds.records.size(); ++i) CHECK(ds.records[i].values == ref.records[i].values);
  }
  const double phi = 0.813;
  const auto rot = synthesize(v, two_refs(), {25}, g, {.phase_hook = std::polar(1.0, phi)});
  for (std::size_t i = 0; i < rot.records.size(); ++i)
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(std::abs(rot.records[i].values[j] - ref.records[i].values[j]) <= 1e-15 * ref.records[i].values[j]);
}

TEST_CASE("background validation errors") {
  const auto v = disc({0, 0, 0}, 0.5);
  CHECK(code_of([&] { check_backgrounds(v, {{disc({0.7, 0, 0}, 0.3)}}); }) == ErrorCode::kConfig);  // overlaps D
  CHECK(code_of([&] { check_backgrounds(v, {}); }) == ErrorCode::kConfig);
  CHECK(code_of([&] { check_backgrounds(v, {{disc({1.5, 0, 0}, 0.3, 0.0)}}); }) == ErrorCode::kConfig);
  const auto w = disc({1.5, 0, 0}, 0.3);
  CHECK(code_of([&] { check_backgrounds(v, {{w, w}}); }) == ErrorCode::kConfig);
  CHECK(code_of([&] { check_backgrounds(v, {{w, w, w}}); }) == ErrorCode::kConfig);
  CHECK_NOTHROW(check_backgrounds(v, {{w}}));
  CHECK_NOTHROW(check_backgrounds(v, two_refs()));
}

TEST_CASE("a translated potential produces the same phaseless data") {
  const GridSpec g = square(64, 2.0);
  const auto v = disc({0.05, 0.1, 0}, 0.4);
  const auto born = translation_twin_demo(v, {0.3, -0.2, 0}, 100, g);
  CHECK(born.max_discrepancy < 1e-13);
  CHECK(born.channels > 0);

  // 0.3125 = 5 cells of h = 1/16; full-solver twins agree to solver accuracy.
  const GridSpec fine = square(64, 2.0);
  const auto full = translation_twin_demo(v, {0.3125, -0.1875, 0}, 16, fine,
                                          {.mode = DataMode::kFullSolver, .solver = {.tolerance = 1e-12}});
  CHECK(full.commensurate);
  CHECK(full.max_discrepancy < 1e-9);
  const auto zero = translation_twin_demo(v, {0, 0, 0}, 16, fine, {.mode = DataMode::kFullSolver});
  CHECK(zero.max_discrepancy == 0.0);
}

TEST_CASE("background report flags a translate pair and its A_y set") {
  const GridSpec pg = square(64, 2.0).dual();
  const auto w1 = disc({1.2137, 0.4071, 0}, 0.3);
  const auto w2 = translate(w1, {-1.5, 0.5, 0});
  const auto rep = validate_backgrounds({{w1, w2}}, pg, 18.0);
  CHECK(rep.translate_detected);
  REQUIRE(rep.translate_shift);
  CHECK((*rep.translate_shift)[0] == doctest::Approx(-1.5));
  REQUIRE(rep.a_y_fraction);
  CHECK(*rep.a_y_fraction > 0.0);
  CHECK_FALSE(rep.warnings.empty());

  const auto good = validate_backgrounds(two_refs(), pg, 18.0);
  CHECK_FALSE(good.translate_detected);
  CHECK(*good.y_fraction < 0.05);
  CHECK(good.z_fraction.size() == 2);
}

TEST_CASE("structural translate detection") {
  const auto w = disc({0.5, 0.5, 0}, 0.2);
  CHECK(detect_translate(w, translate(w, {1, 2, 0})).has_value());
  CHECK_FALSE(detect_translate(w, disc({0.5, 0.5, 0}, 0.3)).has_value());
}

TEST_CASE("zero radii of a disc transform are the J1 zeros over R") {
  const double r = 0.3;
  const auto zs = zero_radii(disc({0.4, -0.7, 0}, r), {1, 1, 0}, 35.0);
  REQUIRE(zs.size() == 3);
  const double j1[] = {3.8317059702075125, 7.0155866698156187, 10.173468135062722};
  for (int i = 0; i < 3; ++i) CHECK(zs[i] == doctest::Approx(j1[i] / r).epsilon(1e-6));
}

TEST_CASE("worker count does not change full-solver data") {
  const GridSpec g = square(32, 1.0);
  const auto v = disc({0, 0, 0}, 0.3, 2.0);
  BackgroundSet bg{{disc({0.6117, 0.1, 0}, 0.2)}};
  SynthesisOptions o{.mode = DataMode::kFullSolver, .p_max = 4.0};
  const auto a = synthesize(v, bg, {9}, g, o);
  o.workers = 3;
  const auto b = synthesize(v, bg, {9}, g, o);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) CHECK(a.records[i].values == b.records[i].values);
  for (const auto& r : a.records) {
    CHECK(norm(r.channel.p) <= 4.0);
    CHECK(r.reports.size() == 2);
  }
}

TEST_CASE("solver failures become flags and zero values") {
  const GridSpec g = square(64, 1.0);
  const auto v = disc({0, 0, 0}, 0.3, 2.0);
  BackgroundSet bg{{disc({0.6117, 0.1, 0}, 0.2)}};
  SynthesisOptions o{.mode = DataMode::kFullSolver, .p_max = 2.0};
  o.solver.max_iterations = 1;
  o.solver.fallback = false;
  o.solver.tolerance = 1e-14;
  const auto ds = synthesize(v, bg, {16}, g, o);
  for (const auto& r : ds.records) {
    CHECK(r.flags == 3u);
    CHECK(r.values == std::vector<double>{0, 0});
  }
}

TEST_CASE("dataset files round-trip") {
  const auto dir = testing_support::scratch_dir("dataset");
  const auto ds = synthesize(disc({0, 0, 0}, 0.4), two_refs(), {25, 100}, square(32, 2.0));
  write_dataset(dir / "data", ds, {{"note", "x"}});
  const auto back = read_dataset(dir / "data");
  CHECK(back.header["note"] == "x");
  REQUIRE(back.dataset.records.size() == ds.records.size());
  CHECK(back.dataset.energies == ds.energies);
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    CHECK(back.dataset.records[i].values == ds.records[i].values);
    CHECK(norm(back.dataset.records[i].channel.k - ds.records[i].channel.k) == 0.0);
    CHECK(back.dataset.records[i].channel.node == ds.records[i].channel.node);
  }
}
