#include "phaseless/field.hpp"

#include <cmath>

#include "phaseless/error.hpp"

namespace phaseless {

bool ScalarField::is_finite() const {
  for (const auto& z : values) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

double l2_norm(const ScalarField& f) {
  double s = 0.0;
  for (const auto& z : f.values) s += std::norm(z);
  return std::sqrt(s * f.grid.cell_volume());
}

double l2_norm(const SpectralField& sp) {
  double s = 0.0;
  for (const auto& z : sp.values) s += std::norm(z);
  return std::sqrt(s * sp.grid.cell_volume());
}

double relative_l2(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid == b.grid)) throw Error(ErrorCode::kGridMismatch, "relative_l2: grids differ");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    num += std::norm(a.values[i] - b.values[i]);
    den += std::norm(b.values[i]);
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : INFINITY;
  return std::sqrt(num / den);
}

}  // namespace phaseless
