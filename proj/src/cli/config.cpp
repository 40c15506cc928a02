#include "c4il/cli/config.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>

#include "c4il/errors.hpp"
#include "c4il/eval/report.hpp"
#include "c4il/numerics/rng.hpp"

namespace c4il {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string fmt_double(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

long long to_integer(const std::string& text) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) throw ConfigError("expected an integer, got '" + text + "'");
  return v;
}

std::uint64_t to_unsigned(const std::string& text) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

int to_int(const std::string& text) {
  const long long v = to_integer(text);
  if (v < -2147483647LL || v > 2147483647LL) throw ConfigError("integer out of range: '" + text + "'");
  return static_cast<int>(v);
}

double to_double(const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v)) {
    throw ConfigError("expected a finite number, got '" + text + "'");
  }
  return v;
}

bool to_bool(const std::string& text) {
  if (text == "true" || text == "yes" || text == "1" || text == "on") return true;
  if (text == "false" || text == "no" || text == "0" || text == "off") return false;
  throw ConfigError("expected true or false, got '" + text + "'");
}

std::vector<int> to_int_list(const std::string& text) {
  std::vector<int> out;
  if (trim(text).empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_int(trim(item)));
  return out;
}

std::string int_list(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

const char* source_name(DataSource s) {
  switch (s) {
    case DataSource::synthetic: return "synthetic";
    case DataSource::csv: return "csv";
    case DataSource::idx: return "idx";
  }
  return "synthetic";
}

DataSource to_source(const std::string& text) {
  if (text == "synthetic") return DataSource::synthetic;
  if (text == "csv") return DataSource::csv;
  if (text == "idx") return DataSource::idx;
  throw ConfigError("unknown data source '" + text + "' (synthetic, csv, idx)");
}

struct KeyDef {
  std::string name;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

const std::vector<KeyDef>& registry() {
  using C = ExperimentConfig;
  static const std::vector<KeyDef> keys = [] {
    std::vector<KeyDef> k = {
        {"name", [](C& c, const std::string& v) { c.name = v; }, [](const C& c) { return c.name; }},
        {"seed", [](C& c, const std::string& v) { c.seed = to_unsigned(v); },
         [](const C& c) { return std::to_string(c.seed); }},
        {"method", [](C& c, const std::string& v) { c.method = parse_method(v); },
         [](const C& c) { return method_name(c.method); }},
        {"phases", [](C& c, const std::string& v) { c.phases = to_int(v); },
         [](const C& c) { return std::to_string(c.phases); }},
        {"data.source", [](C& c, const std::string& v) { c.source = to_source(v); },
         [](const C& c) { return std::string(source_name(c.source)); }},
        {"data.classes", [](C& c, const std::string& v) { c.synthetic.classes = to_int(v); },
         [](const C& c) { return std::to_string(c.synthetic.classes); }},
        {"data.dim", [](C& c, const std::string& v) { c.synthetic.dim = to_int(v); },
         [](const C& c) { return std::to_string(c.synthetic.dim); }},
        {"data.train_per_class", [](C& c, const std::string& v) { c.synthetic.per_class = to_int(v); },
         [](const C& c) { return std::to_string(c.synthetic.per_class); }},
        {"data.test_per_class", [](C& c, const std::string& v) { c.test_per_class = to_int(v); },
         [](const C& c) { return std::to_string(c.test_per_class); }},
        {"data.separation", [](C& c, const std::string& v) { c.synthetic.separation = to_double(v); },
         [](const C& c) { return fmt_double(c.synthetic.separation); }},
        {"data.sigma", [](C& c, const std::string& v) { c.synthetic.sigma_within = to_double(v); },
         [](const C& c) { return fmt_double(c.synthetic.sigma_within); }},
        {"data.seed", [](C& c, const std::string& v) { c.data_seed = to_unsigned(v); },
         [](const C& c) { return std::to_string(c.effective_data_seed()); }},
        {"data.train", [](C& c, const std::string& v) { c.train_path = v; },
         [](const C& c) { return c.train_path.string(); }},
        {"data.test", [](C& c, const std::string& v) { c.test_path = v; },
         [](const C& c) { return c.test_path.string(); }},
        {"data.train_images", [](C& c, const std::string& v) { c.train_images = v; },
         [](const C& c) { return c.train_images.string(); }},
        {"data.train_labels", [](C& c, const std::string& v) { c.train_labels = v; },
         [](const C& c) { return c.train_labels.string(); }},
        {"data.test_images", [](C& c, const std::string& v) { c.test_images = v; },
         [](const C& c) { return c.test_images.string(); }},
        {"data.test_labels", [](C& c, const std::string& v) { c.test_labels = v; },
         [](const C& c) { return c.test_labels.string(); }},
        {"data.standardize", [](C& c, const std::string& v) { c.standardize = to_bool(v); },
         [](const C& c) { return std::string(c.standardize ? "true" : "false"); }},
        {"model.hidden", [](C& c, const std::string& v) { c.hidden = to_int_list(v); },
         [](const C& c) { return int_list(c.hidden); }},
        {"model.rep_dim", [](C& c, const std::string& v) { c.rep_dim = to_int(v); },
         [](const C& c) { return std::to_string(c.rep_dim); }},
        {"loss.beta1", [](C& c, const std::string& v) { c.schedule.beta1 = to_double(v); },
         [](const C& c) { return fmt_double(c.schedule.beta1); }},
        {"loss.lambda", [](C& c, const std::string& v) { c.schedule.lambda = to_double(v); },
         [](const C& c) { return fmt_double(c.schedule.lambda); }},
        {"loss.kappa1", [](C& c, const std::string& v) { c.schedule.kappa1 = to_double(v); },
         [](const C& c) { return fmt_double(c.schedule.kappa1); }},
        {"loss.eta1", [](C& c, const std::string& v) { c.schedule.eta1 = to_double(v); },
         [](const C& c) { return fmt_double(c.schedule.eta1); }},
        {"memory.capacity", [](C& c, const std::string& v) { c.memory_capacity = to_unsigned(v); },
         [](const C& c) { return std::to_string(c.memory_capacity); }},
        {"train.epochs", [](C& c, const std::string& v) { c.epochs = to_int(v); },
         [](const C& c) { return std::to_string(c.epochs); }},
        {"train.batch_size", [](C& c, const std::string& v) { c.batch_size = to_unsigned(v); },
         [](const C& c) { return std::to_string(c.batch_size); }},
        {"optim.lr", [](C& c, const std::string& v) { c.learning_rate = to_double(v); },
         [](const C& c) { return fmt_double(c.learning_rate); }},
        {"optim.momentum", [](C& c, const std::string& v) { c.momentum = to_double(v); },
         [](const C& c) { return fmt_double(c.momentum); }},
        {"optim.weight_decay", [](C& c, const std::string& v) { c.weight_decay = to_double(v); },
         [](const C& c) { return fmt_double(c.weight_decay); }},
        {"optim.lr_decay_every", [](C& c, const std::string& v) { c.lr_decay_every = to_int(v); },
         [](const C& c) { return std::to_string(c.lr_decay_every); }},
        {"optim.lr_decay_gamma", [](C& c, const std::string& v) { c.lr_decay_gamma = to_double(v); },
         [](const C& c) { return fmt_double(c.lr_decay_gamma); }},
        {"augment.noise", [](C& c, const std::string& v) { c.augment_noise = to_double(v); },
         [](const C& c) { return fmt_double(c.augment_noise); }},
        {"augment.mask", [](C& c, const std::string& v) { c.augment_mask = to_double(v); },
         [](const C& c) { return fmt_double(c.augment_mask); }},
        {"eval.nme", [](C& c, const std::string& v) { c.eval_nme = to_bool(v); },
         [](const C& c) { return std::string(c.eval_nme ? "true" : "false"); }},
        {"eval.probe_iterations", [](C& c, const std::string& v) { c.probe_iterations = to_int(v); },
         [](const C& c) { return std::to_string(c.probe_iterations); }},
        {"output.root", [](C& c, const std::string& v) { c.output_root = v; },
         [](const C& c) { return c.output_root.string(); }},
        {"output.name", [](C& c, const std::string& v) { c.output_name = v; },
         [](const C& c) { return c.output_name; }},
    };
    std::sort(k.begin(), k.end(), [](const KeyDef& a, const KeyDef& b) { return a.name < b.name; });
    return k;
  }();
  return keys;
}

const KeyDef* find_key(const std::string& name) {
  for (const KeyDef& k : registry()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

bool is_output_key(const std::string& name) { return name.rfind("output.", 0) == 0; }

}  // namespace

ConfigMap parse_config_text(const std::string& text, const std::string& source) {
  ConfigMap out;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  auto fail = [&](const std::string& msg) { throw ConfigError(source + ":" + std::to_string(line_no) + ": " + msg); };
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail("empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) fail("missing key before '='");
    for (char ch : key) {
      if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.' || ch == '-')) {
        fail("invalid character in key '" + key + "'");
      }
    }
    const std::string full = section.empty() ? key : section + "." + key;
    if (out.contains(full)) {
      fail("duplicate key '" + full + "' (first set on line " + std::to_string(out.at(full).line) + ")");
    }
    out[full] = ConfigEntry{trim(line.substr(eq + 1)), line_no};
  }
  return out;
}

MethodSpec parse_method(const std::string& name) {
  static const std::vector<std::pair<std::string, Preset>> bases = {
      {"c4il-nomem", Preset::c4il_nomem}, {"c4il-mem", Preset::c4il_mem}, {"finetune", Preset::finetune},
      {"lwf", Preset::lwf}, {"joint", Preset::joint}};
  MethodSpec spec;
  std::string rest;
  bool found = false;
  for (const auto& [base, preset] : bases) {
    if (name.rfind(base, 0) == 0) {
      spec.preset = preset;
      rest = name.substr(base.size());
      found = true;
      break;
    }
  }
  if (!found) throw ConfigError("unknown method '" + name + "' (finetune, lwf, c4il-nomem, c4il-mem, joint)");
  while (!rest.empty()) {
    bool* flag = nullptr;
    std::size_t len = 0;
    if (rest.rfind("-DA", 0) == 0) {
      flag = &spec.no_augment;
      len = 3;
    } else if (rest.rfind("-RLD", 0) == 0) {
      flag = &spec.no_rld;
      len = 4;
    } else if (rest.rfind("-LG", 0) == 0) {
      flag = &spec.no_label_guidance;
      len = 3;
    } else {
      throw ConfigError("unknown method suffix '" + rest + "' in '" + name + "' (-DA, -RLD, -LG)");
    }
    if (*flag) throw ConfigError("repeated suffix in method '" + name + "'");
    *flag = true;
    rest = rest.substr(len);
  }
  const bool ablated = spec.no_augment || spec.no_rld || spec.no_label_guidance;
  if (ablated && spec.preset != Preset::c4il_mem && spec.preset != Preset::c4il_nomem) {
    throw ConfigError("ablation suffixes apply only to c4il-mem and c4il-nomem, got '" + name + "'");
  }
  return spec;
}

std::string method_name(const MethodSpec& m) {
  std::string out;
  switch (m.preset) {
    case Preset::finetune: out = "finetune"; break;
    case Preset::lwf: out = "lwf"; break;
    case Preset::c4il_nomem: out = "c4il-nomem"; break;
    case Preset::c4il_mem: out = "c4il-mem"; break;
    case Preset::joint: out = "joint"; break;
  }
  if (m.no_augment) out += "-DA";
  if (m.no_rld) out += "-RLD";
  if (m.no_label_guidance) out += "-LG";
  return out;
}

bool ExperimentConfig::uses_memory() const { return method.preset == Preset::c4il_mem; }

bool ExperimentConfig::label_guidance() const { return !method.no_label_guidance; }

bool ExperimentConfig::augments() const { return !method.no_augment; }

LossSchedule ExperimentConfig::effective_schedule() const {
  LossSchedule s = schedule;
  switch (method.preset) {
    case Preset::finetune:
    case Preset::joint:
      s.beta1 = s.lambda = s.kappa1 = s.eta1 = 0.0;
      break;
    case Preset::lwf:
      s.beta1 = s.lambda = s.eta1 = 0.0;
      break;
    case Preset::c4il_nomem:
    case Preset::c4il_mem:
      if (method.no_rld) s.eta1 = 0.0;
      break;
  }
  return s;
}

int ExperimentConfig::training_phases() const { return method.preset == Preset::joint ? 1 : phases; }

std::uint64_t ExperimentConfig::effective_data_seed() const {
  return data_seed ? *data_seed : derive_seed(seed, {0x44415441ULL});
}

void ExperimentConfig::validate() const {
  if (phases < 1) throw ConfigError("phases must be >= 1");
  if (method.preset != Preset::joint && phases < 2) throw ConfigError("incremental methods need phases >= 2");
  if (hidden.empty() && rep_dim < 1) throw ConfigError("model.rep_dim must be positive");
  for (int h : hidden) {
    if (h < 1) throw ConfigError("model.hidden widths must be positive");
  }
  if (rep_dim < 1) throw ConfigError("model.rep_dim must be positive");
  schedule.validate();
  if (uses_memory() && memory_capacity == 0) throw ConfigError("c4il-mem needs memory.capacity > 0");
  if (epochs < 0) throw ConfigError("train.epochs must be >= 0");
  if (batch_size < 2) throw ConfigError("train.batch_size must be >= 2");
  if (!(learning_rate > 0.0)) throw ConfigError("optim.lr must be positive");
  if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("optim.momentum must lie in [0, 1)");
  if (weight_decay < 0.0) throw ConfigError("optim.weight_decay must be >= 0");
  if (lr_decay_every < 0) throw ConfigError("optim.lr_decay_every must be >= 0");
  if (augment_noise < 0.0) throw ConfigError("augment.noise must be >= 0");
  if (augment_mask < 0.0 || augment_mask > 1.0) throw ConfigError("augment.mask must lie in [0, 1]");
  if (probe_iterations < 0) throw ConfigError("eval.probe_iterations must be >= 0");
  switch (source) {
    case DataSource::synthetic:
      if (synthetic.classes < 2 || synthetic.dim < 1 || synthetic.per_class < 1 || test_per_class < 2) {
        throw ConfigError("synthetic data needs classes >= 2, dim >= 1, train_per_class >= 1, test_per_class >= 2");
      }
      if (!(synthetic.separation >= 0.0) || !(synthetic.sigma_within > 0.0)) {
        throw ConfigError("synthetic data needs separation >= 0 and sigma > 0");
      }
      break;
    case DataSource::csv:
      if (train_path.empty() || test_path.empty()) throw ConfigError("csv data needs data.train and data.test");
      break;
    case DataSource::idx:
      if (train_images.empty() || train_labels.empty() || test_images.empty() || test_labels.empty()) {
        throw ConfigError("idx data needs data.train_images, data.train_labels, data.test_images, data.test_labels");
      }
      break;
  }
}

std::string ExperimentConfig::canonical() const {
  std::string out;
  for (const KeyDef& k : registry()) {
    if (is_output_key(k.name)) continue;
    out += k.name + "=" + k.get(*this) + "\n";
  }
  return out;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a64(canonical()); }

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const KeyDef& k : registry()) out.push_back(k.name);
    return out;
  }();
  return names;
}

void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value) {
  const KeyDef* def = find_key(key);
  if (!def) throw ConfigError("unknown key '" + key + "'");
  try {
    def->set(config, value);
  } catch (const ConfigError& e) {
    throw ConfigError("key '" + key + "': " + e.what());
  }
}

ExperimentConfig config_from_map(const ConfigMap& map, const std::string& source) {
  ExperimentConfig config;
  for (const auto& [key, entry] : map) {
    try {
      set_config_value(config, key, entry.value);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(entry.line) + ": " + e.what());
    }
  }
  if (config.output_name.empty()) config.output_name = config.name;
  try {
    config.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return config;
}

ExperimentConfig config_from_text(const std::string& text, const std::string& source) {
  return config_from_map(parse_config_text(text, source), source);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  ExperimentConfig config = config_from_text(text, path.string());
  config.base_dir = path.parent_path();
  return config;
}

std::filesystem::path ExperimentConfig::resolve(const std::filesystem::path& p) const {
  return p.is_relative() ? base_dir / p : p;
}

std::filesystem::path output_root(const std::filesystem::path& fallback) {
  const char* env = std::getenv("C4IL_OUT");
  if (env && *env) return std::filesystem::path(env);
  return fallback;
}

}  // namespace c4il
