#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "c4il/data/sample.hpp"
#include "c4il/numerics/matrix.hpp"

namespace c4il {

/// Accuracies are fractions; delta and gap are percentage points.
struct ForgettingReport {
  std::string method;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  int phases = 0;

  double final_acc = 0.0;
  double avg_acc_except_first = 0.0;
  std::vector<double> phase_accuracy;

  Matrix separability;                  // [phase k x time t], NaN where t < k; empty for joint runs
  std::vector<double> final_separability;  // each phase alone under the final encoder
  double full_separability = 0.0;
  double inter_phase_confusion_delta = 0.0;

  double probe_accuracy = 0.0;
  double deployed_accuracy = 0.0;
  double classifier_deviation_gap = 0.0;

  std::optional<double> nme_accuracy;

  std::string timestamp;  // not part of any determinism comparison
};

std::string format_hash(std::uint64_t hash);

/// Pretty-printed JSON; NaN entries become null. The timestamp is the last key.
std::string report_json(const ForgettingReport& report);
ForgettingReport parse_report_json(const std::string& text);

/// Flat `metric,phase,time,value` rows; phase and time are 1-based or empty.
std::string report_csv(const ForgettingReport& report);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

/// `sample_id,label,r0,...` rows for external visualization.
void write_representations_csv(std::ostream& out, std::span<const Sample> samples, const Matrix& reps);

}  // namespace c4il
