#pragma once

#include <span>

#include "phaseless/lippmann_schwinger.hpp"
#include "phaseless/potential.hpp"

namespace phaseless {

// Relative tolerance of the k^2 = l^2 energy-shell check.
inline constexpr double kShellTolerance = 1e-12;

void check_energy_shell(const Vec& k, const Vec& l);

/// f(k, l) = (2 pi)^{-d} \int_D e^{-ily} v(y) psi+(y, k) dy by the grid rule.
/// `k` is the incident wave vector psi was computed for.
cplx scattering_amplitude(const ScalarField& v, const ScalarField& psi,
                          const WaveVector& k, const WaveVector& l);

cplx scattering_amplitude(const ScalarField& v, const ScatteringSolution& sol,
                          const WaveVector& l);

/// Born limit of f: v-hat(k - l) from the closed-form transform.
cplx born_amplitude(const PotentialSpec& spec, const WaveVector& k, const WaveVector& l);

/// c(d, |k|) = -pi i (-2 pi i)^{(d-1)/2} |k|^{(d-3)/2} of the far-field expansion.
cplx far_field_constant(int dim, double kmag);

// psi+ evaluated at an arbitrary point via the right side of the integral equation.
cplx evaluate_outside(const ScalarField& v, const ScatteringSolution& sol, const Vec& x);

struct FarFieldCheck {
  double max_deviation = 0.0;
  bool radius_too_small = false;  // radius < 10 x diameter of the support
};

/// Max over directions of |f_far - f| / max|f| where f_far is read off psi+ at
/// the given radius. Zero potential returns 0.
FarFieldCheck far_field_check(const ScalarField& v, const ScatteringSolution& sol,
                              std::span<const Vec> directions, double radius);

}  // namespace phaseless
