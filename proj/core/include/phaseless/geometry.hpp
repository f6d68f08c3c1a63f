#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "phaseless/grid.hpp"

namespace phaseless {

/// Choice of the unit field gamma(p) orthogonal to p. The default is the
/// canonical construction; `flip` negates it and `twist` (d = 3 only) rotates
/// it about p. Any choice is admissible, and results must not depend on it.
struct GammaConvention {
  bool flip = false;
  double twist = 0.0;
};

/// d=2: (-p2, p1)/|p|, gamma(0) = (0, 1).
/// d=3: normalized p x e_i for the first basis vector e_i not parallel to p,
///      gamma(0) = (0, 0, 1).
Vec gamma(const Vec& p, int dim, const GammaConvention& conv = {});

/// One point of Gamma_E: k = p/2 + s gamma, l = -p/2 + s gamma with
/// s = sqrt(E - p^2/4).
struct ScatteringChannel {
  double energy = 0.0;
  Vec p{};
  Vec gamma{};
  Vec k{};
  Vec l{};
  Index node{};  // p-grid multi-index when sampled from a grid
};

/// Throws kOutOfBall when |p| > 2 sqrt(E).
ScatteringChannel channel(double energy, const Vec& p, int dim,
                          const GammaConvention& conv = {});

// Max of the invariant violations (|k^2 - E|/E, |l^2 - E|/E, |k - l - p|, |gamma|-1,
// gamma.p) for diagnostics and property tests.
double channel_invariant_error(const ScatteringChannel& c);

struct GammaSample {
  std::vector<ScatteringChannel> channels;
  std::size_t skipped = 0;  // p-grid nodes outside the closed ball
};

/// One channel per p-grid node with |p| <= 2 sqrt(E), in flat node order.
GammaSample sample_gamma_manifold(double energy, const GridSpec& pgrid,
                                  const GammaConvention& conv = {});

/// Channels of Gamma_E with |p| < 2 sqrt(E0); throws kOrdering if E0 > E.
std::vector<ScatteringChannel> delta_set(double e0, double energy, const GridSpec& pgrid,
                                         const GammaConvention& conv = {});

enum class EnergyMode { kUnbounded, kClustered };

struct EnergySet {
  std::vector<double> energies;
  EnergyMode mode = EnergyMode::kUnbounded;
  std::optional<double> accumulation;  // E* for clustered sets

  void validate() const;
  double max() const { return energies.back(); }
};

EnergySet make_energy_set(double e_min, double e_max, int count, bool logarithmic);

// CSV with columns E, p..., gamma..., k..., l...
void write_channels_csv(std::ostream& os, const std::vector<ScatteringChannel>& channels,
                        int dim);

}  // namespace phaseless
