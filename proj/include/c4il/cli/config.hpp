#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "c4il/core/weights.hpp"
#include "c4il/data/synthetic.hpp"

namespace c4il {

/// `key = value` lines; `[section]` prefixes later keys with "section.";
/// `#` starts a comment. Values keep their text, trimmed.
struct ConfigEntry {
  std::string value;
  int line = 0;
};
using ConfigMap = std::map<std::string, ConfigEntry>;

/// Throws ConfigError("<source>:<line>: ...") on malformed lines or duplicate keys.
ConfigMap parse_config_text(const std::string& text, const std::string& source = "<config>");

enum class Preset { finetune, lwf, c4il_nomem, c4il_mem, joint };

struct MethodSpec {
  Preset preset = Preset::c4il_mem;
  bool no_augment = false;         // -DA
  bool no_rld = false;             // -RLD
  bool no_label_guidance = false;  // -LG
};

/// Accepts finetune, lwf, c4il-nomem, c4il-mem, joint, with any of the
/// suffixes -DA, -RLD, -LG on the c4il presets.
MethodSpec parse_method(const std::string& name);
std::string method_name(const MethodSpec& method);

enum class DataSource { synthetic, csv, idx };

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 0;
  MethodSpec method;
  int phases = 5;

  DataSource source = DataSource::synthetic;
  GaussianMixtureSpec synthetic;  // per_class counts training samples; seed unused
  std::optional<std::uint64_t> data_seed;  // defaults to one derived from `seed`
  int test_per_class = 100;
  std::filesystem::path train_path, test_path;                  // csv
  std::filesystem::path train_images, train_labels;             // idx
  std::filesystem::path test_images, test_labels;               // idx
  bool standardize = true;  // z-score features with train-split statistics

  std::vector<int> hidden = {64, 64};
  int rep_dim = 16;

  LossSchedule schedule;
  std::size_t memory_capacity = 200;

  int epochs = 10;
  std::size_t batch_size = 64;
  double learning_rate = 0.05;
  double momentum = 0.9;
  double weight_decay = 0.0;
  int lr_decay_every = 0;
  double lr_decay_gamma = 0.1;

  double augment_noise = 0.1;  // relative to the mean per-feature std
  double augment_mask = 0.1;

  bool eval_nme = true;
  int probe_iterations = 2000;

  std::filesystem::path output_root = ".";
  std::string output_name;  // defaults to `name`
  std::filesystem::path base_dir;  // relative data paths resolve against this; not hashed

  std::filesystem::path resolve(const std::filesystem::path& p) const;

  // Resolved from the preset.
  bool uses_memory() const;
  bool label_guidance() const;
  bool augments() const;
  LossSchedule effective_schedule() const;
  int training_phases() const;  // 1 for joint
  std::uint64_t effective_data_seed() const;
  /// Throws ConfigError when settings contradict each other or the preset.
  void validate() const;

  /// Every key with its normalized value, sorted, one `key=value` per line.
  /// Output locations are excluded.
  std::string canonical() const;
  std::uint64_t hash() const;
};

/// Keys accepted in a config file, with their defaults in normalized form.
const std::vector<std::string>& config_keys();

ExperimentConfig config_from_map(const ConfigMap& map, const std::string& source = "<config>");
ExperimentConfig config_from_text(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Applies one override; throws ConfigError for unknown keys or bad values.
void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);

std::uint64_t fnv1a64(const std::string& text);

/// Root for outputs: $C4IL_OUT when set and non-empty, else `fallback`.
std::filesystem::path output_root(const std::filesystem::path& fallback);

}  // namespace c4il
