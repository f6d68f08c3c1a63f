#include "phaseless/potential.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "phaseless/error.hpp"

namespace phaseless {

namespace {

constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

cplx plane(const Vec& p, const Vec& c) {
  const double ph = dot(p, c);
  return {std::cos(ph), std::sin(ph)};
}

// (2 pi)^{-d} \int_{|x| <= R} e^{ipx} dx.
double ball_hat(double radius, double q, int dim) {
  const double x = radius * q;
  if (dim == 2) {
    if (x < 1e-8) return radius * radius / (4.0 * kPi) * (1.0 - x * x / 8.0);
    return radius * std::cyl_bessel_j(1.0, x) / (2.0 * kPi * q);
  }
  const double pref = 4.0 * kPi / std::pow(2.0 * kPi, 3);
  if (x < 1e-2) {
    const double x2 = x * x;
    return pref * radius * radius * radius / 3.0 * (1.0 - x2 / 10.0 + x2 * x2 / 280.0);
  }
  return pref * (std::sin(x) - x * std::cos(x)) / (q * q * q);
}

// \int_{|x| > cutoff} e^{-x^2/(2 w^2)} e^{ipx} dx, radial Gauss-Kronrod.
double gaussian_tail(double width, double cutoff, double q, int dim) {
  const double upper = cutoff + 40.0 * width;
  const double s = 1.0 / (2.0 * width * width);
  auto integrand = [&](double r) {
    const double g = std::exp(-r * r * s);
    if (dim == 2) return 2.0 * kPi * r * g * std::cyl_bessel_j(0.0, q * r);
    const double qr = q * r;
    const double sinc = qr < 1e-8 ? 1.0 - qr * qr / 6.0 : std::sin(qr) / qr;
    return 4.0 * kPi * r * r * g * sinc;
  };
  using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;
  return Rule::integrate(integrand, cutoff, upper, 20, 1e-13);
}

double gaussian_full(double width, double q, int dim) {
  return std::pow(2.0 * kPi * width * width, 0.5 * dim) * std::exp(-0.5 * width * width * q * q);
}

}  // namespace

std::vector<SupportBall> PotentialSpec::supports() const {
  std::vector<SupportBall> out;
  out.reserve(components.size());
  for (const auto& c : components) {
    std::visit(overloaded{
                   [&](const Ball& b) { out.push_back({b.center, b.radius}); },
                   [&](const GaussianBump& g) { out.push_back({g.center, g.cutoff}); },
               },
               c);
  }
  return out;
}

cplx PotentialSpec::evaluate(const Vec& x) const {
  cplx v{};
  for (const auto& c : components) {
    std::visit(overloaded{
                   [&](const Ball& b) {
                     if (norm(x - b.center) <= b.radius) v += b.amplitude;
                   },
                   [&](const GaussianBump& g) {
                     const double r = norm(x - g.center);
                     if (r <= g.cutoff) v += g.amplitude * std::exp(-r * r / (2.0 * g.width * g.width));
                   },
               },
               c);
  }
  return v;
}

bool PotentialSpec::in_support(const Vec& x) const {
  for (const auto& s : supports()) {
    if (norm(x - s.center) <= s.radius) return true;
  }
  return false;
}

double PotentialSpec::sup_norm_bound() const {
  double s = 0.0;
  for (const auto& c : components) {
    std::visit([&](const auto& prim) { s += std::abs(prim.amplitude); }, c);
  }
  return s;
}

bool PotentialSpec::is_real() const {
  for (const auto& c : components) {
    bool real = true;
    std::visit([&](const auto& prim) { real = prim.amplitude.imag() == 0.0; }, c);
    if (!real) return false;
  }
  return true;
}

PotentialSpec translate(const PotentialSpec& spec, const Vec& shift) {
  PotentialSpec out = spec;
  for (auto& c : out.components) {
    std::visit([&](auto& prim) { prim.center = prim.center + shift; }, c);
  }
  return out;
}

PotentialSpec superpose(const PotentialSpec& a, const PotentialSpec& b) {
  if (a.dim != b.dim) throw Error(ErrorCode::kInvalidArgument, "superpose: dimension mismatch");
  PotentialSpec out = a;
  out.components.insert(out.components.end(), b.components.begin(), b.components.end());
  return out;
}

bool supports_disjoint(const std::vector<SupportBall>& a, const std::vector<SupportBall>& b) {
  for (const auto& x : a) {
    for (const auto& y : b) {
      if (norm(x.center - y.center) <= x.radius + y.radius) return false;
    }
  }
  return true;
}

double farthest_support_point(const std::vector<SupportBall>& balls) {
  double r = 0.0;
  for (const auto& b : balls) r = std::max(r, norm(b.center) + b.radius);
  return r;
}

ScalarField rasterize(const PotentialSpec& spec, const GridSpec& grid) {
  grid.validate();
  if (spec.dim != grid.dim) {
    throw Error(ErrorCode::kInvalidArgument, "rasterize: potential and grid dimensions differ");
  }
  for (const auto& s : spec.supports()) {
    if (!grid.contains_ball(s.center, s.radius)) {
      throw Error(ErrorCode::kSupportOutsideBox, "rasterize: a primitive support leaves the grid box");
    }
  }
  ScalarField f(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec x = grid.node(i);
    f.values[i] = spec.evaluate(x);
    f.support_mask[i] = spec.in_support(x);
  }
  return f;
}

cplx analytic_hat(const PotentialSpec& spec, const Vec& p) {
  if (spec.dim != 2 && spec.dim != 3) {
    throw Error(ErrorCode::kUnsupportedPrimitive, "analytic_hat: only d = 2, 3 have closed forms");
  }
  const int d = spec.dim;
  const double q = norm(p);
  const double pref = std::pow(2.0 * kPi, -d);
  cplx sum{};
  for (const auto& c : spec.components) {
    std::visit(overloaded{
                   [&](const Ball& b) { sum += b.amplitude * plane(p, b.center) * ball_hat(b.radius, q, d); },
                   [&](const GaussianBump& g) {
                     const double radial = gaussian_full(g.width, q, d) - gaussian_tail(g.width, g.cutoff, q, d);
                     sum += g.amplitude * plane(p, g.center) * (pref * radial);
                   },
               },
               c);
  }
  return sum;
}

double gaussian_tail_bound(const GaussianBump& g, int dim) {
  const double w = g.width, rc = g.cutoff;
  const double e = std::exp(-rc * rc / (2.0 * w * w));
  double t;
  if (dim == 2) {
    t = 2.0 * kPi * w * w * e;
  } else {
    t = 4.0 * kPi * (w * w * rc * e + w * w * w * std::sqrt(kPi / 2.0) * std::erfc(rc / (std::sqrt(2.0) * w)));
  }
  return std::abs(g.amplitude) * std::pow(2.0 * kPi, -dim) * t;
}

}  // namespace phaseless
