#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace phaseless {

// Physical points and wave vectors. Two-dimensional quantities keep z = 0 so
// dot products and norms work unchanged in both dimensions.
using Vec = std::array<double, 3>;

inline double dot(const Vec& a, const Vec& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }
inline Vec operator+(const Vec& a, const Vec& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Vec operator-(const Vec& a, const Vec& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Vec operator-(const Vec& a) { return {-a[0], -a[1], -a[2]}; }
inline Vec operator*(double s, const Vec& a) {
  return {s * a[0], s * a[1], s * a[2]};
}
inline Vec cross(const Vec& a, const Vec& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

using Index = std::array<int, 3>;

/// Uniform grid with the same number of samples per axis.
///
/// Node i along an axis sits at box_min + i * h with h = (box_max - box_min) / n,
/// so box_max itself is not a node. The same type describes frequency grids,
/// whose box is [-n/2, n/2) * dp.
struct GridSpec {
  int dim = 2;
  int n = 0;
  Vec box_min{};
  Vec box_max{};

  // Throws kInvalidArgument when the invariants do not hold.
  void validate() const;

  double spacing(int axis) const { return (box_max[axis] - box_min[axis]) / n; }
  double max_spacing() const;
  double cell_volume() const;
  std::size_t size() const;

  Vec node(const Index& idx) const;
  Vec node(std::size_t flat) const { return node(unflatten(flat)); }

  std::size_t flatten(const Index& idx) const;
  Index unflatten(std::size_t flat) const;
  bool contains_index(const Index& idx) const;

  // True when the closed ball lies strictly inside the box.
  bool contains_ball(const Vec& center, double radius) const;

  /// The frequency grid dual to this spatial grid: dp = 2*pi / L per axis,
  /// nodes p_m = (m - n/2) * dp for m = 0..n-1. Requires even n.
  GridSpec dual() const;

  bool operator==(const GridSpec& other) const = default;
};

// Neighbouring multi-indices of idx within the (2r+1)^dim window, excluding
// idx itself and anything outside the grid.
std::vector<Index> neighbours(const GridSpec& grid, const Index& idx, int radius);

}  // namespace phaseless
