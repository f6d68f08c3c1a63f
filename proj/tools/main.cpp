#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "phaseless/experiment.hpp"

namespace cli = phaseless::cli;

int main(int argc, char** argv) {
  CLI::App app{"Phaseless inverse scattering experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<int> workers;
  std::string mode;
  std::string dataset;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory (overrides output_dir)");
    sub->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--mode", mode, "Data mode")->check(CLI::IsMember({"born", "full"}));
  };

  auto* forward = app.add_subcommand("forward", "Solve the forward problem and write psi and amplitudes");
  auto* synth = app.add_subcommand("synthesize", "Write a phaseless dataset");
  auto* recon = app.add_subcommand("reconstruct", "Recover v from a phaseless dataset");
  auto* conv = app.add_subcommand("convergence", "Measure the high-energy decay of |f|^2 - |v-hat|^2");
  auto* demo = app.add_subcommand("ambiguity-demo", "Show that phaseless data cannot see translations");
  auto* bounds = app.add_subcommand("bounds", "Evaluate the explicit constants");
  for (auto* sub : {forward, synth, recon, conv, demo, bounds}) add_common(sub);
  recon->add_option("--dataset", dataset, "Dataset stem (without .csv/.json)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitConfig;
  }

  try {
    cli::ExperimentConfig cfg = cli::load_config(config_path);
    if (workers) cfg.workers = *workers;
    if (mode == "born") cfg.mode = phaseless::DataMode::kBornOracle;
    if (mode == "full") cfg.mode = phaseless::DataMode::kFullSolver;
    const std::filesystem::path out = out_dir.empty() ? cfg.output_dir : std::filesystem::path(out_dir);

    cli::CommandResult result;
    if (*forward) {
      result = cli::cmd_forward(cfg, out);
    } else if (*synth) {
      result = cli::cmd_synthesize(cfg, out);
    } else if (*recon) {
      result = cli::cmd_reconstruct(cfg, dataset, out);
    } else if (*conv) {
      result = cli::cmd_convergence(cfg, out);
    } else if (*demo) {
      result = cli::cmd_ambiguity_demo(cfg, out);
    } else {
      result = cli::cmd_bounds(cfg, out);
    }
    std::cout << result.summary.dump(2) << '\n';
    return result.exit_code;
  } catch (const phaseless::Error& e) {
    std::cerr << "error [" << phaseless::to_string(e.code()) << "]: " << e.what() << '\n';
    return cli::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitConfig;
  }
}
