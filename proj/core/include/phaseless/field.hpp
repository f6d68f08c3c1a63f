#pragma once

#include <complex>
#include <vector>

#include "phaseless/grid.hpp"

namespace phaseless {

using cplx = std::complex<double>;

/// Complex samples of a function on a spatial grid, row-major (last axis fastest).
struct ScalarField {
  GridSpec grid;
  std::vector<cplx> values;
  std::vector<bool> support_mask;

  ScalarField() = default;
  explicit ScalarField(const GridSpec& g)
      : grid(g), values(g.size(), cplx{}), support_mask(g.size(), false) {}

  bool is_finite() const;
};

/// Samples of u-hat(p) = (2 pi)^{-d} \int e^{ipx} u(x) dx on the frequency grid
/// dual to `spatial`.
struct SpectralField {
  GridSpec grid;     // frequency grid
  GridSpec spatial;  // the spatial grid this spectrum inverts onto
  std::vector<cplx> values;

  SpectralField() = default;
  explicit SpectralField(const GridSpec& spatial_grid)
      : grid(spatial_grid.dual()),
        spatial(spatial_grid),
        values(grid.size(), cplx{}) {}
};

// Discrete L2 norms with the grid measure (h^d or dp^d).
double l2_norm(const ScalarField& f);
double l2_norm(const SpectralField& s);

// ||a - b|| / ||b|| on a common grid.
double relative_l2(const ScalarField& a, const ScalarField& b);

}  // namespace phaseless
