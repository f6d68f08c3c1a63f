#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "phaseless/bounds.hpp"
#include "phaseless/error.hpp"
#include "phaseless/geometry.hpp"
#include "phaseless/reconstruction.hpp"
#include "phaseless/synthesis.hpp"

namespace phaseless::cli {

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitSolver = 3,
  kExitThreshold = 4,
};

struct ForwardOptions {
  double energy = 0.0;
  std::vector<Vec> incident;  // unit directions
  int outgoing = 32;
};

struct ConvergenceOptions {
  double slope_min = -0.75;
  double slope_max = -0.30;
  DecayReference reference = DecayReference::kGrid;
};

struct BoundsOptions {
  std::optional<double> sigma;  // default d + 1
  double a0 = 1.0;              // placeholder, not a derived value
};

struct ExperimentConfig {
  std::string scenario;
  int dim = 2;
  GridSpec grid;
  PotentialSpec potential;
  std::vector<SupportBall> domain;  // declared D (defaults to the potential supports)
  BackgroundSet backgrounds;
  EnergySet energies;
  DataMode mode = DataMode::kBornOracle;
  SolverConfig solver;
  ReconstructionOptions reconstruction;
  std::size_t references = 2;
  ForwardOptions forward;
  ConvergenceOptions convergence;
  GammaConvention gamma;
  std::optional<double> p_max;  // synthesis: only channels with |p| <= p_max
  bool withhold_potential = false;  // keep v out of the dataset header
  Vec shift{};
  BoundsOptions bounds;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;
  int workers = 1;
  nlohmann::json raw;
};

/// Validates against the versioned schema; unknown keys are rejected.
/// Throws Error(kConfig).
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

// Maps a library error onto the CLI exit status.
int exit_code_for(const Error& e);

struct CommandResult {
  int exit_code = kExitOk;
  nlohmann::json summary;
};

CommandResult cmd_forward(const ExperimentConfig& cfg, const std::filesystem::path& out);
CommandResult cmd_synthesize(const ExperimentConfig& cfg, const std::filesystem::path& out);
CommandResult cmd_reconstruct(const ExperimentConfig& cfg,
                              const std::filesystem::path& dataset_stem,
                              const std::filesystem::path& out);
CommandResult cmd_convergence(const ExperimentConfig& cfg, const std::filesystem::path& out);
CommandResult cmd_ambiguity_demo(const ExperimentConfig& cfg, const std::filesystem::path& out);
CommandResult cmd_bounds(const ExperimentConfig& cfg, const std::filesystem::path& out);

// JSON helpers shared with the dataset header.
nlohmann::json to_json(const PotentialSpec& spec);
PotentialSpec potential_from_json(const nlohmann::json& j, int dim);
nlohmann::json to_json(const GridSpec& g);
GridSpec grid_from_json(const nlohmann::json& j, int dim);
nlohmann::json to_json(const SolverConfig& s);

}  // namespace phaseless::cli
