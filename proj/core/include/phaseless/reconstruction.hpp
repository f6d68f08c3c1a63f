#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phaseless/field.hpp"
#include "phaseless/potential.hpp"
#include "phaseless/synthesis.hpp"

namespace phaseless {

enum MaskFlag : std::uint8_t {
  kFlagZ0 = 1 << 0,
  kFlagZ1 = 1 << 1,
  kFlagZ2 = 1 << 2,
  kFlagY12 = 1 << 3,
  kFlagOutOfBall = 1 << 4,
  kFlagSolverFailed = 1 << 5,
};

struct Thresholds {
  double eps_z0 = 0.0;
  std::vector<double> eps_z;  // per reference
  double eps_y = 1e-3;
};

/// Per p-grid node flags; a node is usable when no flag is set.
struct SingularMask {
  GridSpec pgrid;
  std::vector<std::uint8_t> flags;
  Thresholds thresholds;
  std::size_t considered = 0;  // nodes with |p| <= p_cut
  std::size_t masked = 0;      // flagged nodes among those

  bool usable(std::size_t node) const { return flags[node] == 0; }
  double masked_fraction() const {
    return considered == 0 ? 1.0 : static_cast<double>(masked) / considered;
  }
};

enum class ModulusEstimator { kTopEnergy, kRichardson };

/// Estimate of |v-hat_j(p)|^2 from the channels of one node.
/// kTopEnergy: value at the largest valid energy.
/// kRichardson: (sqrt(Eb) sb - sqrt(Ea) sa) / (sqrt(Eb) - sqrt(Ea)) from the
/// two largest valid energies, clamped at 0 (falls back to kTopEnergy with a
/// single energy). Throws kNoValidChannel when nothing is usable.
double recover_modulus_sq(const std::vector<const ChannelRecord*>& node_records,
                          std::size_t j, ModulusEstimator est = ModulusEstimator::kTopEnergy);

struct TwoRefPhase {
  cplx phase;              // e^{i alpha}
  double residual = 0.0;   // | |(cos, sin)| - 1 | before renormalization
  bool inconsistent = false;
};

/// Solves the 2x2 system for (cos alpha, sin alpha) given m0 = |v|^2,
/// m_j = |v + w_j|^2 and the reference values. Throws kSingularNode when
/// sqrt(m0) < eps_z0, |w_j| < eps_z[j] or |sin(beta2 - beta1)| < eps_y.
TwoRefPhase recover_phase_two_refs(double m0, double m1, double m2, cplx w1hat, cplx w2hat,
                                   const Thresholds& th);

struct OneRefPhase {
  double cos_delta = 0.0;  // cos(alpha - beta1), clamped to [-1, 1]
  double clamped = 0.0;    // amount removed by clamping
  cplx plus;               // e^{i(beta1 + arccos)}
  cplx minus;              // e^{i(beta1 - arccos)}
};

OneRefPhase recover_phase_one_ref(double m0, double m1, cplx w1hat, const Thresholds& th);

enum class Branch { kTwoReference, kOneReferencePlus, kOneReferenceMinus };

const char* to_string(Branch b);

struct ReconstructionOptions {
  ModulusEstimator estimator = ModulusEstimator::kTopEnergy;
  std::optional<double> p_cut;   // default 0.9 * 2 sqrt(E_max)
  double eps_z_rel = 1e-3;
  double eps_y = 1e-3;
  double max_mask_fraction = 0.2;  // refusal limit; nodes flagged only Z0 do not count
  double taper_fraction = 0.1;
  std::vector<SupportBall> domain;  // declared D; empty = no restriction
  bool declared_real = false;
};

struct Diagnostics {
  double max_system_residual = 0.0;
  double mean_system_residual = 0.0;
  std::size_t inconsistent_nodes = 0;
  double max_clamp = 0.0;  // one-reference arccos clamping
  std::size_t inpainted_nodes = 0;
  std::size_t isolated_nodes = 0;
  std::string estimator;
  double top_energy = 0.0;
  double p_cut = 0.0;
  double max_richardson_shift = 0.0;
  std::optional<double> decay_slope;
  std::optional<double> decay_intercept;
  double imaginary_ratio = 0.0;  // ||Im v|| / ||Re v|| of the recovered potential
  std::size_t flag_counts[6] = {0, 0, 0, 0, 0, 0};
};

struct ReconstructionResult {
  SpectralField spectrum;      // recovered v-hat (inpainted, untapered), zero beyond p_cut
  SingularMask mask;
  std::vector<double> modulus_sq;  // recovered |v-hat|^2 per node
  ScalarField potential;       // band-limited synthesis restricted to D
  Branch branch = Branch::kTwoReference;
  Diagnostics diagnostics;
};

/// Node-wise moduli for v (index 0) and each v_j.
struct RecoveredModuli {
  GridSpec pgrid;
  std::vector<std::vector<double>> m;  // [j][node], NaN where no data
  std::vector<std::uint8_t> has_data;
  std::vector<std::uint8_t> solver_failed;
  double max_shift = 0.0;
};

RecoveredModuli recover_moduli(const PhaselessDataset& ds, ModulusEstimator est);

/// Flags nodes where the phase formulas are undefined plus out-of-ball and
/// solver-failed nodes. Considered nodes are those with |p| <= p_cut.
SingularMask build_mask(const RecoveredModuli& moduli, const BackgroundSet& bg, double p_cut,
                        double eps_z_rel, double eps_y);

/// Full pipeline. n = 2 returns one result; n = 1 returns the two branch
/// candidates (plus first). Throws kDegeneracy when the masked fraction
/// exceeds the limit and kNoData for an empty dataset.
std::vector<ReconstructionResult> reconstruct(const PhaselessDataset& ds,
                                              const BackgroundSet& bg,
                                              const ReconstructionOptions& opts = {});

// Cosine radial taper: 1 below (1 - frac) p_cut, 0 beyond p_cut.
double radial_taper(double pmag, double p_cut, double frac);

/// Inverse transform of taper(|p|) * reference(p) on the dual of `grid`; the
/// band-limited version of a known potential for error measurements.
ScalarField band_limited(const SpectralField& reference, double p_cut, double frac);

}  // namespace phaseless
