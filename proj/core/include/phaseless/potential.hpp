#pragma once

#include <variant>
#include <vector>

#include "phaseless/field.hpp"
#include "phaseless/grid.hpp"

namespace phaseless {

// Constant amplitude inside a closed ball.
struct Ball {
  Vec center{};
  double radius = 0.0;
  cplx amplitude{1.0, 0.0};
};

// amplitude * exp(-|x - c|^2 / (2 width^2)) for |x - c| <= cutoff, zero outside.
// The hard cutoff keeps the support compact.
struct GaussianBump {
  Vec center{};
  double width = 0.0;
  double cutoff = 0.0;
  cplx amplitude{1.0, 0.0};
};

using Primitive = std::variant<Ball, GaussianBump>;

// A support ball; every primitive's support is one of these.
struct SupportBall {
  Vec center{};
  double radius = 0.0;
};

struct PotentialSpec {
  int dim = 2;
  std::vector<Primitive> components;

  bool empty() const { return components.empty(); }
  std::vector<SupportBall> supports() const;

  // Pointwise value (sum over primitives).
  cplx evaluate(const Vec& x) const;
  bool in_support(const Vec& x) const;

  // Upper bound of the sup norm: sum of |amplitude|.
  double sup_norm_bound() const;

  bool is_real() const;
};

PotentialSpec translate(const PotentialSpec& spec, const Vec& shift);

// Union of the two primitive lists (v + w).
PotentialSpec superpose(const PotentialSpec& a, const PotentialSpec& b);

// Ball-distance disjointness of two finite unions of balls.
bool supports_disjoint(const std::vector<SupportBall>& a,
                       const std::vector<SupportBall>& b);

// Farthest distance of any support point from the origin.
double farthest_support_point(const std::vector<SupportBall>& balls);

/// Samples spec at the grid nodes. Throws kSupportOutsideBox unless every
/// primitive support lies strictly inside the box.
ScalarField rasterize(const PotentialSpec& spec, const GridSpec& grid);

/// Closed-form u-hat(p) of the potential under the (2 pi)^{-d} e^{+ipx} convention.
///
/// Balls use the Bessel (d=2) or spherical (d=3) form. Gaussians use the
/// untruncated Gaussian transform minus the tail beyond the cutoff, the tail
/// being a one-dimensional radial Gauss-Kronrod quadrature; its magnitude is at
/// most |A| (2 pi)^{-d} \int_{|x|>cutoff} e^{-x^2/(2 w^2)} dx.
cplx analytic_hat(const PotentialSpec& spec, const Vec& p);

// Bound on the cutoff correction of one Gaussian primitive (see analytic_hat).
double gaussian_tail_bound(const GaussianBump& g, int dim);

}  // namespace phaseless
