#include "phaseless/amplitude.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "phaseless/error.hpp"
#include "phaseless/green.hpp"

namespace phaseless {

void check_energy_shell(const Vec& k, const Vec& l) {
  const double k2 = dot(k, k);
  const double l2 = dot(l, l);
  if (std::abs(k2 - l2) > kShellTolerance * std::max({k2, l2, 1.0})) {
    throw Error(ErrorCode::kEnergyShellMismatch,
                "k^2 = " + std::to_string(k2) + " but l^2 = " + std::to_string(l2));
  }
}

cplx scattering_amplitude(const ScalarField& v, const ScalarField& psi, const WaveVector& k,
                          const WaveVector& l) {
  check_energy_shell(k.k, l.k);
  if (!(psi.grid == v.grid)) throw Error(ErrorCode::kGridMismatch, "psi and v live on different grids");
  const GridSpec& g = v.grid;
  cplx sum{};
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (v.values[i] == cplx{}) continue;
    const double ph = -dot(l.k, g.node(i));
    sum += cplx{std::cos(ph), std::sin(ph)} * v.values[i] * psi.values[i];
  }
  return sum * g.cell_volume() / std::pow(2.0 * std::numbers::pi, g.dim);
}

cplx scattering_amplitude(const ScalarField& v, const ScatteringSolution& sol, const WaveVector& l) {
  return scattering_amplitude(v, sol.psi, sol.k, l);
}

cplx born_amplitude(const PotentialSpec& spec, const WaveVector& k, const WaveVector& l) {
  check_energy_shell(k.k, l.k);
  return analytic_hat(spec, k.k - l.k);
}

cplx far_field_constant(int dim, double kmag) {
  const double pi = std::numbers::pi;
  const cplx root = std::pow(cplx{0.0, -2.0 * pi}, 0.5 * (dim - 1));
  return cplx{0.0, -pi} * root * std::pow(kmag, 0.5 * (dim - 3));
}

cplx evaluate_outside(const ScalarField& v, const ScatteringSolution& sol, const Vec& x) {
  const GridSpec& g = v.grid;
  const double kmag = sol.k.magnitude();
  const double vol = g.cell_volume();
  cplx sum{};
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (v.values[i] == cplx{}) continue;
    const Vec d = x - g.node(i);
    const cplx w = norm(d) < 1e-14 ? green_self_integral(vol, kmag, g.dim)
                                   : green_function(d, kmag, g.dim) * vol;
    sum += w * v.values[i] * sol.psi.values[i];
  }
  const double ph = dot(sol.k.k, x);
  return cplx{std::cos(ph), std::sin(ph)} + sum;
}

FarFieldCheck far_field_check(const ScalarField& v, const ScatteringSolution& sol,
                              std::span<const Vec> directions, double radius) {
  FarFieldCheck out;
  const GridSpec& g = v.grid;
  Vec centroid{};
  std::size_t count = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (v.values[i] != cplx{}) {
      centroid = centroid + g.node(i);
      ++count;
    }
  }
  if (count == 0) return out;
  centroid = (1.0 / static_cast<double>(count)) * centroid;
  double reach = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (v.values[i] != cplx{}) reach = std::max(reach, norm(g.node(i) - centroid));
  }
  out.radius_too_small = radius < 20.0 * reach;

  const double kmag = sol.k.magnitude();
  const cplx c = far_field_constant(g.dim, kmag);
  std::vector<cplx> exact, far;
  for (const Vec& dir : directions) {
    const Vec e = (1.0 / norm(dir)) * dir;
    const WaveVector l{kmag * e};
    exact.push_back(scattering_amplitude(v, sol, l));
    const Vec x = radius * e;
    const double ph = dot(sol.k.k, x);
    const cplx scattered = evaluate_outside(v, sol, x) - cplx{std::cos(ph), std::sin(ph)};
    const cplx outgoing = std::exp(cplx{0.0, kmag * radius}) / std::pow(radius, 0.5 * (g.dim - 1));
    far.push_back(scattered / (c * outgoing));
  }
  double scale = 0.0;
  for (const auto& f : exact) scale = std::max(scale, std::abs(f));
  if (scale == 0.0) return out;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    out.max_deviation = std::max(out.max_deviation, std::abs(far[i] - exact[i]) / scale);
  }
  return out;
}

}  // namespace phaseless
