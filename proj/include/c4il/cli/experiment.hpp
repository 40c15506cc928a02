#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "c4il/cli/config.hpp"
#include "c4il/core/trainer.hpp"
#include "c4il/eval/report.hpp"

namespace c4il {

struct ExperimentData {
  Dataset train;
  Dataset test;
};

/// Synthetic data draws train and test from one mixture: the first
/// train_per_class samples of each class train, the rest test.
ExperimentData load_experiment_data(const ExperimentConfig& config);

struct PhaseAudit {
  int phase = 0;
  std::size_t samples_read = 0;
  std::size_t distinct_samples = 0;
  std::size_t memory_reads = 0;     // distinct exemplar ids read
  std::size_t forbidden_reads = 0;  // distinct ids of earlier phases outside the memory bank
};

struct ExperimentResult {
  ForgettingReport report;
  std::vector<EpochLog> log;
  std::vector<PhaseAudit> audit;
  std::vector<ModelSnapshot> checkpoints;  // one per training phase
  std::vector<Dataset> eval_pools;         // held-out samples grouped by nominal phase
};

struct RunOptions {
  std::optional<std::filesystem::path> output_dir;  // artifacts are written only when set
  std::string timestamp;
};

/// Full protocol: split the stream, train phase by phase (memory updated after
/// each phase), then score the saved checkpoints. Deterministic in the config.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Writes phase_log.csv, audit.csv, checkpoint_phase<t>.bin, report.json,
/// report.csv, representations.csv into `dir`, each tagged with the config hash.
void write_artifacts(const std::filesystem::path& dir, const ExperimentConfig& config,
                     const ExperimentResult& result);

std::string phase_log_csv(std::uint64_t config_hash, const std::vector<EpochLog>& log);

std::string utc_timestamp();

}  // namespace c4il
