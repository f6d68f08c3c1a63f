#pragma once

// Independent oracles shared by the unit tests. Nothing here calls the
// library's own transforms or solvers.

#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

namespace testing_support {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// (2 pi)^{-2} \int_{|x - c| <= R} e^{ip.x} f(|x - c|) dx by tensor Gauss-Legendre
// in polar coordinates (r split into `rings` panels).
template <class F>
cplx polar_hat_2d(double px, double py, double cx, double cy, double radius, F f, int rings = 16) {
  using Rule = boost::math::quadrature::gauss<double, 40>;
  auto angular = [&](double r, bool imag) {
    return Rule::integrate(
        [&](double t) {
          const double ph = px * r * std::cos(t) + py * r * std::sin(t);
          return imag ? std::sin(ph) : std::cos(ph);
        },
        0.0, 2.0 * kPi);
  };
  double re = 0.0, im = 0.0;
  for (int ring = 0; ring < rings; ++ring) {
    const double r0 = radius * ring / rings, r1 = radius * (ring + 1) / rings;
    re += Rule::integrate([&](double r) { return r * f(r) * angular(r, false); }, r0, r1);
    im += Rule::integrate([&](double r) { return r * f(r) * angular(r, true); }, r0, r1);
  }
  const double ph = px * cx + py * cy;
  return cplx{re, im} * cplx{std::cos(ph), std::sin(ph)} / (4.0 * kPi * kPi);
}

// Exact scattering amplitude of the disc v = A 1_{|x| <= R} in two dimensions
// from the partial-wave (Bessel series) solution of -Delta psi + v psi = E psi.
// theta is the angle between the incident and outgoing directions.
inline cplx disc_amplitude_exact(double energy, double amplitude, double radius, double theta) {
  const double k = std::sqrt(energy);
  const cplx kappa = std::sqrt(cplx{energy - amplitude, 0.0});
  if (kappa.imag() != 0.0) return {std::nan(""), std::nan("")};
  const double q = kappa.real();
  auto j = [](int m, double x) { return std::cyl_bessel_j(std::abs(m), x) * ((m < 0 && (m & 1)) ? -1.0 : 1.0); };
  auto y = [](int m, double x) { return std::cyl_neumann(std::abs(m), x) * ((m < 0 && (m & 1)) ? -1.0 : 1.0); };
  auto jp = [&](int m, double x) { return 0.5 * (j(m - 1, x) - j(m + 1, x)); };
  auto yp = [&](int m, double x) { return 0.5 * (y(m - 1, x) - y(m + 1, x)); };
  cplx sum{};
  for (int m = -60; m <= 60; ++m) {
    const double kr = k * radius, qr = q * radius;
    const cplx h{j(m, kr), y(m, kr)};
    const cplx hp{jp(m, kr), yp(m, kr)};
    const cplx a = (q * jp(m, qr) * j(m, kr) - k * j(m, qr) * jp(m, kr)) / (k * j(m, qr) * hp - q * jp(m, qr) * h);
    sum += a * std::exp(cplx{0.0, m * theta});
  }
  return cplx{0.0, 1.0} / (kPi * kPi) * sum;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("phaseless_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing_support
