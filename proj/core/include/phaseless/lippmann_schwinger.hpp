#pragma once

#include <map>
#include <memory>
#include <string>

#include "phaseless/field.hpp"
#include "phaseless/fourier.hpp"

namespace phaseless {

struct WaveVector {
  Vec k{};

  double energy() const { return dot(k, k); }
  double magnitude() const { return norm(k); }
};

enum class SolveMethod { kBornIteration, kDenseDirect };

std::string to_string(SolveMethod m);

struct SolverConfig {
  double tolerance = 1e-8;
  int max_iterations = 200;
  double resolution_factor = 8.0;  // grid must satisfy h <= 2 pi / (q sqrt(E))
  bool fallback = true;            // dense solve when iteration stalls (grids <= 48^d)
  bool force_dense = false;
};

struct SolverReport {
  SolveMethod method = SolveMethod::kBornIteration;
  int iterations = 0;
  double residual = 0.0;  // recomputed after the solve
  bool converged = false;
};

struct ScatteringSolution {
  ScalarField psi;  // total field psi+ on the whole grid
  WaveVector k;
  SolverReport report;
};

// Largest grid (per axis) for which the dense fallback is attempted.
inline constexpr int kDenseFallbackMaxN = 48;

// Divergence detector: this many consecutive residual increases.
inline constexpr int kDivergenceWindow = 5;

/// Discretized Lippmann-Schwinger operator (K u)(x_i) = sum_j W_ij u_j on one
/// grid at one |k|. Off-diagonal weights are G(x_i - x_j) h^d; the diagonal
/// weight is the integral of G over the disc/ball of volume h^d. Application
/// is an aperiodic convolution via FFT on a 2x zero-padded grid.
class GreenOperator {
 public:
  GreenOperator(const GridSpec& grid, double kmag);

  const GridSpec& grid() const { return grid_; }
  double kmag() const { return kmag_; }
  cplx self_weight() const { return self_weight_; }

  // Weight W_ij between two nodes (the dense oracle uses the same weights).
  cplx weight(const Index& i, const Index& j) const;

  // out = K u.
  void apply(const std::vector<cplx>& u, std::vector<cplx>& out) const;

 private:
  GridSpec grid_;
  double kmag_;
  cplx self_weight_;
  int padded_n_;
  std::unique_ptr<FftPlan> plan_;
  std::vector<cplx> kernel_hat_;
  mutable std::vector<cplx> work_;
};

/// Solves psi = e^{ikx} + K(v psi) for the fields of one grid. Caches one
/// GreenOperator per |k|, so repeated solves at the same energy reuse the
/// kernel transform. Not thread-safe; use one solver per worker.
class LippmannSchwingerSolver {
 public:
  explicit LippmannSchwingerSolver(SolverConfig cfg = {}) : cfg_(cfg) {}

  const SolverConfig& config() const { return cfg_; }

  /// Throws kUnderResolvedGrid, or kNonConvergence when the iteration fails
  /// and no dense fallback is possible.
  ScatteringSolution solve(const ScalarField& v, const WaveVector& k);

  // Born (Neumann) iteration only; reports converged = false instead of
  // throwing on failure.
  ScatteringSolution solve_iterative(const ScalarField& v, const WaveVector& k);

  // Dense Nystrom solve restricted to the support nodes.
  ScatteringSolution solve_dense(const ScalarField& v, const WaveVector& k);

  /// Relative residual ||psi - e^{ikx} - K(v psi)|| / ||e^{ikx}||.
  double residual(const ScalarField& v, const ScalarField& psi, const WaveVector& k);

  const GreenOperator& operator_for(const GridSpec& grid, double kmag);

 private:
  SolverConfig cfg_;
  std::map<std::pair<double, int>, std::unique_ptr<GreenOperator>> cache_;
  GridSpec cached_grid_{};
};

// Checks h <= 2 pi / (q sqrt(E)); throws kUnderResolvedGrid otherwise.
void check_resolution(const GridSpec& grid, double energy, double resolution_factor);

ScalarField plane_wave(const GridSpec& grid, const Vec& k);

/// Convenience wrapper around a temporary solver.
ScatteringSolution solve_lippmann_schwinger(const ScalarField& v, const WaveVector& k,
                                            const SolverConfig& cfg = {});

}  // namespace phaseless
