#include "phaseless/grid.hpp"

#include <numbers>

#include "phaseless/error.hpp"

namespace phaseless {

void GridSpec::validate() const {
  if (dim != 2 && dim != 3) {
    throw Error(ErrorCode::kInvalidArgument, "grid dimension must be 2 or 3");
  }
  if (n < 8) throw Error(ErrorCode::kInvalidArgument, "grid needs at least 8 samples per axis");
  for (int a = 0; a < dim; ++a) {
    if (!(box_min[a] < box_max[a])) {
      throw Error(ErrorCode::kInvalidArgument, "grid box must satisfy box_min < box_max");
    }
  }
}

double GridSpec::max_spacing() const {
  double h = 0.0;
  for (int a = 0; a < dim; ++a) h = std::max(h, spacing(a));
  return h;
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= spacing(a);
  return v;
}

std::size_t GridSpec::size() const {
  std::size_t s = 1;
  for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(n);
  return s;
}

Vec GridSpec::node(const Index& idx) const {
  Vec x{};
  for (int a = 0; a < dim; ++a) x[a] = box_min[a] + idx[a] * spacing(a);
  return x;
}

std::size_t GridSpec::flatten(const Index& idx) const {
  std::size_t f = 0;
  for (int a = 0; a < dim; ++a) f = f * static_cast<std::size_t>(n) + static_cast<std::size_t>(idx[a]);
  return f;
}

Index GridSpec::unflatten(std::size_t flat) const {
  Index idx{};
  for (int a = dim - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % static_cast<std::size_t>(n));
    flat /= static_cast<std::size_t>(n);
  }
  return idx;
}

bool GridSpec::contains_index(const Index& idx) const {
  for (int a = 0; a < dim; ++a) {
    if (idx[a] < 0 || idx[a] >= n) return false;
  }
  return true;
}

bool GridSpec::contains_ball(const Vec& center, double radius) const {
  for (int a = 0; a < dim; ++a) {
    if (!(center[a] - radius > box_min[a] && center[a] + radius < box_max[a])) return false;
  }
  return true;
}

GridSpec GridSpec::dual() const {
  if (n % 2 != 0) throw Error(ErrorCode::kInvalidArgument, "dual grid requires even n");
  GridSpec g;
  g.dim = dim;
  g.n = n;
  for (int a = 0; a < dim; ++a) {
    const double dp = 2.0 * std::numbers::pi / (box_max[a] - box_min[a]);
    g.box_min[a] = -0.5 * n * dp;
    g.box_max[a] = 0.5 * n * dp;
  }
  return g;
}

std::vector<Index> neighbours(const GridSpec& grid, const Index& idx, int radius) {
  std::vector<Index> out;
  const int zr = grid.dim == 3 ? radius : 0;
  for (int i = -radius; i <= radius; ++i) {
    for (int j = -radius; j <= radius; ++j) {
      for (int k = -zr; k <= zr; ++k) {
        if (i == 0 && j == 0 && k == 0) continue;
        Index q{idx[0] + i, idx[1] + j, idx[2] + k};
        if (grid.contains_index(q)) out.push_back(q);
      }
    }
  }
  return out;
}

}  // namespace phaseless
