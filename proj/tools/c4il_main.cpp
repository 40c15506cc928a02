#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "c4il/cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace c4il;
  CLI::App app{"Class-incremental learning runner with forgetting diagnostics"};
  app.require_subcommand(1);

  std::string run_config;
  auto* run = app.add_subcommand("run", "Run one experiment from a config file");
  run->add_option("config", run_config, "Config file")->required();

  GradcheckOptions grad;
  std::string fault;
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of every layer and loss");
  gradcheck->add_option("--seed", grad.seed, "Random seed");
  gradcheck->add_option("--scale", grad.scale, "Multiply tensor sizes by this factor");
  gradcheck->add_option("--instances", grad.instances, "Random instances per component");
  gradcheck->add_option("--inject-fault", fault, "Negate the analytic gradient of this component");

  std::string data_spec;
  auto* gen = app.add_subcommand("gen-data", "Write a synthetic Gaussian-mixture CSV");
  gen->add_option("spec", data_spec, "Data spec file")->required();

  std::string sweep_config, sweep_grid;
  auto* sweep = app.add_subcommand("sweep", "Grid search over loss weights");
  sweep->add_option("config", sweep_config, "Base config file")->required();
  sweep->add_option("grid", sweep_grid, "Grid file")->required();

  std::string report_dir;
  auto* report = app.add_subcommand("report", "Re-render report.csv from report.json");
  report->add_option("dir", report_dir, "Run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*run) return cmd_run(run_config, std::cout, std::cerr);
  if (*gradcheck) {
    if (!fault.empty()) grad.inject_fault = fault;
    return cmd_gradcheck(grad, std::cout, std::cerr);
  }
  if (*gen) return cmd_gen_data(data_spec, std::cout, std::cerr);
  if (*sweep) return cmd_sweep(sweep_config, sweep_grid, std::cout, std::cerr);
  return cmd_report(report_dir, std::cout, std::cerr);
}
