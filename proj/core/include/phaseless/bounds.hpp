#pragma once

#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "phaseless/lippmann_schwinger.hpp"
#include "phaseless/potential.hpp"

namespace phaseless {

/// c1(d, sigma) = (\int_{R^d} (1 + |x|^2)^{-sigma/2} dx)^{1/2}, by radial
/// quadrature. Throws kDivergentIntegral for sigma <= d.
double c1(int dim, double sigma);

// Closed form (pi^{d/2} Gamma((sigma - d)/2) / Gamma(sigma/2))^{1/2}.
double c1_closed_form(int dim, double sigma);

/// c2(D, sigma) = sup_{x in D} (1 + |x|^2)^{sigma/2}, exact for ball unions.
/// Throws kUnboundedDomain for an empty or non-finite description.
double c2(const std::vector<SupportBall>& domain, double sigma);

// rho1(d, sigma, R) = max(2 a0 R, 1).
double rho1(double a0, double r);

// c(D) = 6 (2 pi)^{-2d} a0 c1^4 c2^3.
double decay_constant(int dim, double sigma, double a0, const std::vector<SupportBall>& domain);

struct DecayFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Least-squares line through (log E, log err). Needs >= 4 strictly
/// increasing energies and positive errors, else kDegenerateFit.
DecayFit fit_decay(std::span<const double> energies, std::span<const double> errors);

enum class DecayReference { kGrid, kAnalytic };

struct DecayRow {
  double energy = 0.0;
  double error = 0.0;           // against the selected reference
  double error_analytic = 0.0;  // always against the closed form
  std::size_t channels = 0;
  int max_iterations = 0;
  double max_residual = 0.0;
};

struct BoundsReport {
  int dim = 2;
  double sigma = 0.0;
  double a0 = 1.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double rho1 = 0.0;
  double c_domain = 0.0;
  std::vector<double> sup_norms;  // N_j
  std::vector<DecayRow> rows;
  std::optional<DecayFit> fit;

  nlohmann::json to_json() const;
};

struct DecayExperiment {
  PotentialSpec potential;
  GridSpec grid;
  std::vector<double> energies;
  SolverConfig solver{};
  DecayReference reference = DecayReference::kGrid;
  int workers = 1;
};

/// Full-solver errors max_p | |f|^2 - |v-hat(p)|^2 | over the in-ball p-grid
/// per energy, plus the fitted log-log slope.
BoundsReport run_decay_experiment(const DecayExperiment& exp, double sigma, double a0);

BoundsReport constants_report(int dim, double sigma, double a0,
                              const std::vector<SupportBall>& domain,
                              std::vector<double> sup_norms);

}  // namespace phaseless
