#include "phaseless/geometry.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "phaseless/error.hpp"

namespace phaseless {

namespace {

// Nodes within this relative distance of the sphere |p| = 2 sqrt(E) count as inside.
constexpr double kBallSlack = 1e-12;

Vec canonical_gamma(const Vec& p, int dim) {
  const double r = norm(p);
  if (dim == 2) {
    if (r == 0.0) return {0.0, 1.0, 0.0};
    return {-p[1] / r, p[0] / r, 0.0};
  }
  if (r == 0.0) return {0.0, 0.0, 1.0};
  for (int i = 0; i < 3; ++i) {
    Vec e{};
    e[i] = 1.0;
    const Vec c = cross(p, e);
    const double cn = norm(c);
    if (cn > 1e-8 * r) return (1.0 / cn) * c;
  }
  throw Error(ErrorCode::kInvalidArgument, "no basis vector transverse to p");
}

}  // namespace

Vec gamma(const Vec& p, int dim, const GammaConvention& conv) {
  Vec g = canonical_gamma(p, dim);
  const double r = norm(p);
  if (dim == 3 && conv.twist != 0.0 && r > 0.0) {
    const Vec axis = (1.0 / r) * p;
    g = std::cos(conv.twist) * g + std::sin(conv.twist) * cross(axis, g);
  }
  return conv.flip ? -g : g;
}

ScatteringChannel channel(double energy, const Vec& p, int dim, const GammaConvention& conv) {
  if (!(energy > 0.0)) throw Error(ErrorCode::kInvalidArgument, "energy must be positive");
  const double radius = 2.0 * std::sqrt(energy);
  const double pn = norm(p);
  if (pn > radius * (1.0 + kBallSlack)) {
    throw Error(ErrorCode::kOutOfBall, fmt::format("|p| = {} exceeds 2 sqrt(E) = {}", pn, radius));
  }
  ScatteringChannel c;
  c.energy = energy;
  c.p = p;
  c.gamma = gamma(p, dim, conv);
  const double s = std::sqrt(std::max(energy - 0.25 * pn * pn, 0.0));
  c.k = 0.5 * p + s * c.gamma;
  c.l = -0.5 * p + s * c.gamma;
  return c;
}

double channel_invariant_error(const ScatteringChannel& c) {
  const double e = c.energy;
  double err = std::abs(dot(c.k, c.k) - e) / e;
  err = std::max(err, std::abs(dot(c.l, c.l) - e) / e);
  err = std::max(err, norm(c.k - c.l - c.p));
  err = std::max(err, std::abs(norm(c.gamma) - 1.0));
  err = std::max(err, std::abs(dot(c.gamma, c.p)));
  return err;
}

GammaSample sample_gamma_manifold(double energy, const GridSpec& pgrid, const GammaConvention& conv) {
  GammaSample out;
  const double radius = 2.0 * std::sqrt(energy);
  for (std::size_t i = 0; i < pgrid.size(); ++i) {
    const Index idx = pgrid.unflatten(i);
    const Vec p = pgrid.node(idx);
    if (norm(p) > radius * (1.0 + kBallSlack)) {
      ++out.skipped;
      continue;
    }
    ScatteringChannel c = channel(energy, p, pgrid.dim, conv);
    c.node = idx;
    out.channels.push_back(c);
  }
  return out;
}

std::vector<ScatteringChannel> delta_set(double e0, double energy, const GridSpec& pgrid,
                                         const GammaConvention& conv) {
  if (e0 > energy) throw Error(ErrorCode::kOrdering, "delta set needs E0 <= E");
  std::vector<ScatteringChannel> out;
  const double radius = 2.0 * std::sqrt(e0);
  for (auto& c : sample_gamma_manifold(energy, pgrid, conv).channels) {
    if (norm(c.p) < radius) out.push_back(c);
  }
  return out;
}

void EnergySet::validate() const {
  if (energies.empty()) throw Error(ErrorCode::kInvalidArgument, "energy set is empty");
  for (std::size_t i = 0; i < energies.size(); ++i) {
    if (!(energies[i] > 0.0) || !std::isfinite(energies[i])) {
      throw Error(ErrorCode::kInvalidArgument, "energies must be positive and finite");
    }
    if (i > 0 && !(energies[i] > energies[i - 1])) {
      throw Error(ErrorCode::kOrdering, "energies must be strictly increasing");
    }
  }
  if (mode == EnergyMode::kClustered) {
    if (!accumulation) throw Error(ErrorCode::kInvalidArgument, "clustered energy set needs E*");
    if (*accumulation < energies.back()) {
      throw Error(ErrorCode::kOrdering, "accumulation point must not be below the energies");
    }
  }
}

EnergySet make_energy_set(double e_min, double e_max, int count, bool logarithmic) {
  if (count < 1 || !(e_min > 0.0) || e_max < e_min || (count > 1 && e_max == e_min)) {
    throw Error(ErrorCode::kInvalidArgument, "energy range needs 0 < e_min < e_max and count >= 1");
  }
  EnergySet set;
  for (int i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    set.energies.push_back(logarithmic ? e_min * std::pow(e_max / e_min, t)
                                       : e_min + t * (e_max - e_min));
  }
  set.energies.back() = count == 1 ? e_min : e_max;
  set.validate();
  return set;
}

void write_channels_csv(std::ostream& os, const std::vector<ScatteringChannel>& channels, int dim) {
  static constexpr const char* kAxis = "xyz";
  os << "E";
  for (const char* name : {"p", "gamma", "k", "l"}) {
    for (int a = 0; a < dim; ++a) os << ',' << name << '_' << kAxis[a];
  }
  os << '\n';
  for (const auto& c : channels) {
    os << fmt::format("{:.17g}", c.energy);
    for (const Vec* v : {&c.p, &c.gamma, &c.k, &c.l}) {
      for (int a = 0; a < dim; ++a) os << fmt::format(",{:.17g}", (*v)[a]);
    }
    os << '\n';
  }
}

}  // namespace phaseless
