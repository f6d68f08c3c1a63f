#pragma once

#include <optional>
#include <string>
#include <vector>

#include "phaseless/geometry.hpp"
#include "phaseless/lippmann_schwinger.hpp"
#include "phaseless/potential.hpp"

namespace phaseless {

/// Known reference scatterers w_1..w_n (n in {1, 2}).
struct BackgroundSet {
  std::vector<PotentialSpec> backgrounds;

  std::size_t size() const { return backgrounds.size(); }
  std::vector<cplx> hats(const Vec& p) const;
};

enum class DataMode { kBornOracle, kFullSolver };

const char* to_string(DataMode m);

// Bit j of ChannelRecord::flags is set when the solve for potential j
// (0 = v, j = v + w_j) failed; its value is then stored as 0.
struct ChannelRecord {
  ScatteringChannel channel;
  std::vector<double> values;  // |f|^2, |f_1|^2, ..., |f_n|^2
  unsigned flags = 0;
  std::vector<SolverReport> reports;  // full-solver mode only
};

/// The phaseless data S sampled over Gamma_Lambda.
struct PhaselessDataset {
  int dim = 2;
  GridSpec grid;  // spatial grid; channels sit on its dual
  DataMode mode = DataMode::kBornOracle;
  std::size_t references = 0;
  std::vector<double> energies;
  std::vector<ChannelRecord> records;

  void validate() const;
};

struct SynthesisOptions {
  DataMode mode = DataMode::kBornOracle;
  SolverConfig solver{};
  GammaConvention gamma{};
  int workers = 1;
  // Only channels with |p| <= p_max are synthesized (all of Gamma_E when unset).
  std::optional<double> p_max;
  // Test hook: amplitudes are multiplied by this before the modulus is taken.
  cplx phase_hook{1.0, 0.0};
};

/// Checks Omega_j disjoint from D, w_j != 0 and w_1 != w_2 (hats compared on
/// a probe set). Throws kConfig on violation.
void check_backgrounds(const PotentialSpec& v, const BackgroundSet& bg);

/// For every E in Lambda and every p-grid channel of Gamma_E, stores |f|^2 and
/// |f_j|^2 for v_j = v + w_j. Phases are discarded.
PhaselessDataset synthesize(const PotentialSpec& v, const BackgroundSet& bg,
                            const std::vector<double>& energies, const GridSpec& grid,
                            const SynthesisOptions& opts = {});

struct TwinReport {
  double max_discrepancy = 0.0;  // max |a - b| / max |a|
  bool commensurate = true;      // shift is a whole number of grid cells
  std::size_t channels = 0;
};

/// |f|^2 for v and v(. - y) over Gamma_E; the two agree (phaseless data cannot
/// see translations).
TwinReport translation_twin_demo(const PotentialSpec& v, const Vec& shift, double energy,
                                 const GridSpec& grid, const SynthesisOptions& opts = {});

struct BackgroundReport {
  std::vector<double> z_fraction;  // per background
  std::optional<double> y_fraction;
  bool translate_detected = false;
  std::optional<Vec> translate_shift;
  std::optional<double> a_y_fraction;  // fraction of nodes with |sin(p.y)| < eps_y
  std::vector<std::string> warnings;
};

/// Advisory scan of the singular sets of the references over the p-grid nodes
/// with |p| <= p_max.
BackgroundReport validate_backgrounds(const BackgroundSet& bg, const GridSpec& pgrid,
                                      double p_max, double eps_z_rel = 1e-3,
                                      double eps_y = 1e-3);

// Structural test w_2 = w_1(. - y); returns y.
std::optional<Vec> detect_translate(const PotentialSpec& a, const PotentialSpec& b);

/// Radii r in (0, r_max] where |w-hat(r e)| has a near-zero local minimum
/// along direction e (refined by golden-section search).
std::vector<double> zero_radii(const PotentialSpec& w, const Vec& direction, double r_max,
                               int samples = 4000);

}  // namespace phaseless
