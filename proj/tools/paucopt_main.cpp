// Command line entry point: `paucopt run <config>` and
// `paucopt compare <config>...`.
#include "paucopt/experiment.hpp"

#include <CLI11.hpp>

#include <string>
#include <vector>

int main(int argc, char** argv) {
  CLI::App app{"Partial-AUC / ranked-range trainer"};
  app.require_subcommand(1);

  std::string run_config;
  std::vector<std::string> compare_configs;
  std::string out_dir;
  std::vector<std::uint64_t> seeds;
  double epochs = -1.0;

  CLI::App* run = app.add_subcommand("run", "run one experiment config");
  run->add_option("config", run_config, "config file")->required();
  run->add_option("--out", out_dir, "output directory override");
  run->add_option("--seed", seeds, "seed list override");
  run->add_option("--epochs", epochs, "epoch-equivalent budget override");

  CLI::App* cmp = app.add_subcommand("compare", "run several configs on one dataset");
  cmp->add_option("configs", compare_configs, "config files")->required()->expected(-2);
  cmp->add_option("--out", out_dir, "output directory override");
  cmp->add_option("--seed", seeds, "seed list override");
  cmp->add_option("--epochs", epochs, "epoch-equivalent budget override");

  CLI11_PARSE(app, argc, argv);

  paucopt::CliOverrides overrides;
  if (!out_dir.empty()) overrides.out_dir = out_dir;
  overrides.seeds = seeds;
  if (epochs > 0.0) overrides.max_epochs = epochs;

  if (run->parsed()) return paucopt::run_experiment_cli(run_config, overrides);
  return paucopt::compare_cli(compare_configs, overrides);
}
