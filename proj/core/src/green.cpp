#include "phaseless/green.hpp"

#include <cmath>
#include <numbers>

#include "phaseless/error.hpp"

namespace phaseless {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

cplx hankel1(double order, double x) {
  return {std::cyl_bessel_j(order, x), std::cyl_neumann(order, x)};
}

}  // namespace

cplx green_radial(double r, double kmag, int dim) {
  if (r <= 0.0) throw Error(ErrorCode::kZeroDisplacement, "green_function: |x| must be positive");
  if (kmag <= 0.0) throw Error(ErrorCode::kInvalidArgument, "green_function: |k| must be positive");
  if (dim == 2) return -0.25 * kI * hankel1(0.0, kmag * r);
  if (dim == 3) return -std::exp(kI * (kmag * r)) / (4.0 * kPi * r);
  throw Error(ErrorCode::kInvalidArgument, "green_function: dimension must be 2 or 3");
}

cplx green_function(const Vec& x, double kmag, int dim) {
  return green_radial(norm(x), kmag, dim);
}

cplx green_self_integral(double cell_volume, double kmag, int dim) {
  const double k = kmag;
  if (dim == 2) {
    // \int_0^a r H0(kr) dr = a H1(ka)/k + 2i/(pi k^2).
    const double a = std::sqrt(cell_volume / kPi);
    return -(kI * kPi * a / (2.0 * k)) * hankel1(1.0, k * a) + 1.0 / (k * k);
  }
  // -\int_0^a r e^{ikr} dr over the sphere of equal volume.
  const double a = std::cbrt(3.0 * cell_volume / (4.0 * kPi));
  const double x = k * a;
  if (x > 0.5) return (1.0 - std::exp(kI * x) * (1.0 - kI * x)) / (k * k);
  // Small ka: 1 - e^{ix}(1 - ix) = sum_{n>=2} (n-1)(ix)^n / n!.
  cplx term = 1.0, sum = 0.0;
  for (int n = 1; n <= 30; ++n) {
    term *= kI * x / double(n);
    sum += double(n - 1) * term;
  }
  return sum / (k * k);
}

}  // namespace phaseless
