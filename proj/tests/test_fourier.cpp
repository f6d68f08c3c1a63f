#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "phaseless/error.hpp"
#include "phaseless/field_io.hpp"
#include "phaseless/fourier.hpp"
#include "phaseless/potential.hpp"
#include "support.hpp"

using namespace phaseless;
using testing_support::kPi;

namespace {

GridSpec square(int n, double half, int dim = 2) {
  GridSpec g;
  g.dim = dim;
  g.n = n;
  for (int a = 0; a < dim; ++a) {
    g.box_min[a] = -half;
    g.box_max[a] = half;
  }
  return g;
}

PotentialSpec ball(Vec c, double r, cplx a = 1.0, int dim = 2) {
  PotentialSpec s;
  s.dim = dim;
  s.components.push_back(Ball{c, r, a});
  return s;
}

ScalarField random_field(const GridSpec& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  ScalarField f(g);
  for (auto& z : f.values) z = {nd(rng), nd(rng)};
  return f;
}

}  // namespace

TEST_CASE("grid spacing, nodes and flat indexing agree") {
  const GridSpec g = square(16, 1.0);
  CHECK(g.spacing(0) == doctest::Approx(0.125));
  CHECK(g.node(Index{0, 0, 0})[0] == -1.0);
  for (std::size_t i : {0ul, 17ul, 255ul}) CHECK(g.flatten(g.unflatten(i)) == i);
  const GridSpec d = g.dual();
  CHECK(d.spacing(0) == doctest::Approx(kPi));
  CHECK(d.node(Index{8, 8, 0})[0] == doctest::Approx(0.0));
}

TEST_CASE("invalid grids are rejected") {
  GridSpec g = square(4, 1.0);
  CHECK_THROWS_AS(g.validate(), Error);
  g = square(16, 1.0);
  g.box_max[1] = -2.0;
  CHECK_THROWS_AS(g.validate(), Error);
}

TEST_CASE("rasterize: empty spec, ball indicator and superposition") {
  const GridSpec g = square(20, 1.0);
  PotentialSpec empty;
  for (const auto& z : rasterize(empty, g).values) CHECK(z == cplx{});

  const ScalarField b = rasterize(ball({0, 0, 0}, 0.5), g);
  CHECK(b.values[g.flatten(Index{10, 10, 0})] == cplx{1.0});
  CHECK(b.values[g.flatten(Index{19, 19, 0})] == cplx{});  // node (0.9, 0.9)

  const auto a = ball({-0.5, 0.0, 0}, 0.3), c = ball({0.5, 0.2, 0}, 0.25, {0.0, 2.0});
  const ScalarField sum = rasterize(superpose(a, c), g);
  const ScalarField fa = rasterize(a, g), fc = rasterize(c, g);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(sum.values[i] == fa.values[i] + fc.values[i]);
}

TEST_CASE("rasterize refuses supports that leave the box") {
  try {
    rasterize(ball({0.8, 0, 0}, 0.5), square(16, 1.0));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSupportOutsideBox);
  }
}

TEST_CASE("forward transform: zero field and exact round trip") {
  const GridSpec g = square(32, 1.5);
  const SpectralField z = forward_transform(ScalarField(g));
  for (const auto& v : z.values) CHECK(v == cplx{});

  const ScalarField f = random_field(g, 7);
  const ScalarField back = inverse_transform(forward_transform(f));
  CHECK(relative_l2(back, f) < 1e-12);

  const GridSpec g3 = square(8, 1.0, 3);
  const ScalarField f3 = random_field(g3, 8);
  CHECK(relative_l2(inverse_transform(forward_transform(f3)), f3) < 1e-12);
}

TEST_CASE("discrete Parseval identity ||u||^2 = (2 pi)^d ||u-hat||^2") {
  const GridSpec g = square(32, 2.0);
  const ScalarField f = random_field(g, 3);
  const SpectralField s = forward_transform(f);
  CHECK(l2_norm(f) * l2_norm(f) == doctest::Approx(std::pow(2 * kPi, 2) * l2_norm(s) * l2_norm(s)).epsilon(1e-12));
}

TEST_CASE("real field has conjugate-symmetric spectrum") {
  const GridSpec g = square(32, 1.0);
  ScalarField f = random_field(g, 11);
  for (auto& z : f.values) z = z.real();
  const SpectralField s = forward_transform(f);
  // p_m = (m - n/2) dp, so -p_m sits at index n - m (m >= 1).
  for (int i = 1; i < g.n; ++i) {
    for (int j = 1; j < g.n; ++j) {
      const cplx a = s.values[s.grid.flatten(Index{i, j, 0})];
      const cplx b = s.values[s.grid.flatten(Index{g.n - i, g.n - j, 0})];
      CHECK(std::abs(a - std::conj(b)) < 1e-14);
    }
  }
}

TEST_CASE("translating a field by whole cells multiplies its spectrum by e^{ipy}") {
  const GridSpec g = square(64, 2.0);
  const auto v = ball({0.1, -0.2, 0}, 0.4);
  const Vec y{0.25, -0.5, 0.0};  // 4 and -8 cells
  const SpectralField s = forward_transform(rasterize(v, g));
  const SpectralField t = forward_transform(rasterize(translate(v, y), g));
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    const double ph = dot(s.grid.node(i), y);
    CHECK(std::abs(t.values[i] - cplx{std::cos(ph), std::sin(ph)} * s.values[i]) < 1e-14);
  }
}

TEST_CASE("inverse transform rejects a spectrum from another grid") {
  const SpectralField s(square(16, 1.0));
  CHECK_THROWS_AS(inverse_transform(s, square(16, 2.0)), Error);
  CHECK_NOTHROW(inverse_transform(s, square(16, 1.0)));
}

TEST_CASE("analytic 2-D ball transform matches polar quadrature") {
  const auto v = ball({0.3, -0.2, 0}, 0.5, {1.5, -0.5});
  CHECK(std::abs(analytic_hat(v, {0, 0, 0}) - cplx{1.5, -0.5} * 0.25 / (4 * kPi)) < 1e-16);
  for (Vec p : {Vec{0.0, 0.0, 0}, Vec{1.0, 2.0, 0}, Vec{-7.0, 3.0, 0}, Vec{12.0, -9.0, 0}}) {
    const cplx want = cplx{1.5, -0.5} * testing_support::polar_hat_2d(p[0], p[1], 0.3, -0.2, 0.5,
                                                                      [](double) { return 1.0; });
    CHECK(std::abs(analytic_hat(v, p) - want) < 1e-13);
  }
}

TEST_CASE("analytic 3-D ball transform matches a radial quadrature") {
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double r = 0.7;
  const auto v = ball({0, 0, 0}, r, 2.0, 3);
  for (double q : {0.0, 1e-3, 0.8, 5.0, 17.0}) {
    // (2 pi)^{-3} \int 4 pi s^2 sinc(q s) ds over [0, R].
    const double rad = GK::integrate(
        [&](double s) { return 4 * kPi * s * s * (q * s == 0.0 ? 1.0 : std::sin(q * s) / (q * s)); }, 0.0, r, 0, 1e-14);
    CHECK(std::abs(analytic_hat(v, {q, 0, 0}) - 2.0 * rad / std::pow(2 * kPi, 3)) < 1e-14);
  }
}

TEST_CASE("truncated Gaussian transform matches polar quadrature; tail bound holds") {
  PotentialSpec s;
  const GaussianBump g{{0.2, 0.1, 0}, 0.3, 0.6, 1.0};
  s.components.push_back(g);
  PotentialSpec wide = s;
  std::get<GaussianBump>(wide.components[0]).cutoff = 10.0;
  for (Vec p : {Vec{0, 0, 0}, Vec{3.0, -1.0, 0}, Vec{8.0, 6.0, 0}}) {
    const cplx want = testing_support::polar_hat_2d(
        p[0], p[1], 0.2, 0.1, 0.6, [](double r) { return std::exp(-r * r / (2 * 0.09)); });
    CHECK(std::abs(analytic_hat(s, p) - want) < 1e-13);
    CHECK(std::abs(analytic_hat(s, p) - analytic_hat(wide, p)) <= gaussian_tail_bound(g, 2) * (1 + 1e-12));
  }
}

TEST_CASE("translation covariance of analytic transforms") {
  PotentialSpec s = ball({0.1, 0.2, 0}, 0.3, {1.0, 0.5});
  s.components.push_back(GaussianBump{{-0.5, 0.4, 0}, 0.2, 0.5, 2.0});
  const Vec y{0.37, -1.1, 0};
  for (Vec p : {Vec{1, 1, 0}, Vec{-4, 9, 0}, Vec{13, 2, 0}}) {
    const double ph = dot(p, y);
    CHECK(std::abs(analytic_hat(translate(s, y), p) - cplx{std::cos(ph), std::sin(ph)} * analytic_hat(s, p)) < 1e-15);
  }
}

TEST_CASE("discrete transform of a rasterized ball approaches the closed form") {
  const GridSpec g = square(256, 1.0);
  const auto v = ball({0.05, -0.1, 0}, 0.5);
  const SpectralField s = forward_transform(rasterize(v, g));
  const double scale = 0.25 / (4 * kPi);
  for (Index m : {Index{128, 128, 0}, Index{130, 127, 0}, Index{133, 131, 0}}) {
    const std::size_t i = s.grid.flatten(m);
    CHECK(std::abs(s.values[i] - analytic_hat(v, s.grid.node(i))) < 0.02 * scale);
  }
}

TEST_CASE("band-limited inverse of the analytic ball spectrum stays near the rasterized ball") {
  const GridSpec g = square(256, 1.0);
  const auto v = ball({0.0, 0.0, 0}, 0.5);
  SpectralField s(g);
  for (std::size_t i = 0; i < s.values.size(); ++i) s.values[i] = analytic_hat(v, s.grid.node(i));
  const double err = relative_l2(inverse_transform(s), rasterize(v, g));
  MESSAGE("Gibbs-limited relative L2 distance at n=256: " << err);
  CHECK(err < 0.1);
}

TEST_CASE("field files round-trip bit for bit") {
  const auto dir = testing_support::scratch_dir("field_io");
  const GridSpec g = square(16, 1.25);
  const ScalarField f = random_field(g, 5);
  write_field(dir / "f.bin", f);
  const ScalarField r = read_scalar_field(dir / "f.bin");
  CHECK(r.grid == g);
  CHECK(r.values == f.values);

  const SpectralField s = forward_transform(f);
  write_field(dir / "s.bin", s);
  const SpectralField t = read_spectral_field(dir / "s.bin");
  CHECK(t.spatial == g);
  CHECK(t.values == s.values);
  CHECK_THROWS_AS(read_spectral_field(dir / "f.bin"), Error);
}
