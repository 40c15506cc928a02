#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "c4il/cli/config.hpp"
#include "c4il/cli/gradcheck_suite.hpp"

namespace c4il {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitCheck = 2, kExitIo = 3 };

/// Loads the config, runs the experiment, and writes artifacts under
/// output_root(config.output.root) / output.name.
int cmd_run(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err);

int cmd_gradcheck(const GradcheckOptions& options, std::ostream& out, std::ostream& err);

/// Spec file keys: classes, dim, per_class, separation, sigma, seed, output.
int cmd_gen_data(const std::filesystem::path& spec_path, std::ostream& out, std::ostream& err);

/// Grid file: one line per swept key (loss.beta1, loss.lambda, loss.kappa1,
/// loss.eta1) with comma-separated values. Writes sweep_summary.csv sorted
/// by avg_acc_except_first, best first.
int cmd_sweep(const std::filesystem::path& config_path, const std::filesystem::path& grid_path, std::ostream& out,
              std::ostream& err);

/// Re-renders report.csv from report.json in `dir`.
int cmd_report(const std::filesystem::path& dir, std::ostream& out, std::ostream& err);

struct SweepPoint {
  std::map<std::string, std::string> overrides;
};

/// Cartesian product of the grid in file order, last key varying fastest.
std::vector<SweepPoint> parse_grid(const std::string& text, const std::string& source = "<grid>");

/// Maps an exception thrown by a command to its exit code and prints it.
int report_failure(const std::exception& e, std::ostream& err);

}  // namespace c4il
