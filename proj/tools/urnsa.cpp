// urnsa: simulate | asymptotics | validate | oracle

#include "urnsa/commands.hpp"
#include "urnsa/config.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Randomized urn models for adaptive allocation: simulation, limit objects and validation"};
  app.require_subcommand(1);

  urnsa::CommandOptions options;
  std::string config_path, preset, out;
  int workers = 0;
  std::vector<int> criteria;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    cmd->add_option("--preset", preset, "Named preset")
        ->check(CLI::IsMember(urnsa::preset_names()));
    cmd->add_option("--out", out, "Output directory");
    cmd->add_option("--workers", workers, "Worker threads (URNSA_WORKERS takes precedence)")
        ->check(CLI::PositiveNumber);
  };

  auto* simulate = app.add_subcommand("simulate", "Simulate trajectories and write CSV series");
  auto* asymptotics = app.add_subcommand("asymptotics", "Compute v*, regime, Gamma, Dh, Sigma and Gamma_H");
  auto* validate = app.add_subcommand("validate", "Run the acceptance criteria or configured statistics");
  auto* oracle = app.add_subcommand("oracle", "Enumerate the exact law at a small horizon");
  for (auto* cmd : {simulate, asymptotics, validate, oracle}) add_common(cmd);
  validate->add_flag("--quick", options.quick, "Tenth of the replications, tolerances widened by sqrt(10)");
  validate->add_option("--criteria", criteria, "Criterion ids to run (1-9)")->check(CLI::Range(1, 9));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : urnsa::kExitConfig;
  }

  if (!config_path.empty()) options.config_path = config_path;
  if (!preset.empty()) options.preset = preset;
  if (!out.empty()) options.out = out;
  if (workers > 0) options.workers = workers;
  options.criteria = criteria;

  const std::string command = app.get_subcommands().front()->get_name();
  return urnsa::run_command(command, options, std::cout, std::cerr);
}
