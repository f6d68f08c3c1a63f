#pragma once

#include "phaseless/field.hpp"

namespace phaseless {

/// Outgoing Green's function of Delta + k^2 with the sign convention
/// G = -(2 pi)^{-d} \int e^{i xi x} / (xi^2 - k^2 - i0) d xi:
/// d = 2: -(i/4) H0^(1)(k|x|);  d = 3: -e^{ik|x|} / (4 pi |x|).
/// Depends on x only through |x|. Throws kZeroDisplacement at x = 0.
cplx green_function(const Vec& x, double kmag, int dim);

// Radial form of the above.
cplx green_radial(double r, double kmag, int dim);

/// Integral of G over the disc (d=2) or ball (d=3) of the given volume
/// centred at the singularity; the diagonal weight of the discretized operator.
cplx green_self_integral(double cell_volume, double kmag, int dim);

}  // namespace phaseless
