#include "c4il/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "c4il/cli/experiment.hpp"
#include "c4il/data/io.hpp"
#include "c4il/errors.hpp"

namespace c4il {

namespace {

std::filesystem::path run_directory(const ExperimentConfig& config) {
  return output_root(config.output_root) / config.output_name;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    out.push_back(first == std::string::npos ? "" : item.substr(first, last - first + 1));
  }
  return out;
}

}  // namespace

int report_failure(const std::exception& e, std::ostream& err) {
  err << "error: " << e.what() << '\n';
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return kExitIo;
  return kExitConfig;
}

int cmd_run(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err) {
  try {
    const ExperimentConfig config = load_config(config_path);
    const std::filesystem::path dir = run_directory(config);
    RunOptions options;
    options.output_dir = dir;
    options.timestamp = utc_timestamp();
    const ExperimentResult result = run_experiment(config, options);
    const ForgettingReport& r = result.report;
    out << "config " << format_hash(r.config_hash) << " method " << r.method << " seed " << r.seed << '\n';
    out << std::fixed << std::setprecision(4);
    out << "final_acc " << r.final_acc << " avg_acc_except_first " << r.avg_acc_except_first << '\n';
    out << "confusion_delta " << r.inter_phase_confusion_delta << " deviation_gap " << r.classifier_deviation_gap
        << '\n';
    out << "artifacts " << dir.string() << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    return report_failure(e, err);
  }
}

int cmd_gradcheck(const GradcheckOptions& options, std::ostream& out, std::ostream& err) {
  try {
    const auto start = std::chrono::steady_clock::now();
    const std::vector<ComponentCheck> checks = run_gradcheck(options);
    bool ok = true;
    for (const ComponentCheck& c : checks) {
      out << std::left << std::setw(14) << c.name << " instances " << c.instances << " max_rel_err "
          << std::scientific << std::setprecision(3) << c.max_relative_error << (c.passed ? "  ok" : "  FAILED")
          << '\n';
      ok = ok && c.passed;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out << std::fixed << std::setprecision(2) << "elapsed " << seconds << " s\n";
    if (!ok) {
      err << "gradcheck failed:";
      for (const ComponentCheck& c : checks) {
        if (!c.passed) err << ' ' << c.name;
      }
      err << '\n';
      return kExitCheck;
    }
    return kExitOk;
  } catch (const std::exception& e) {
    return report_failure(e, err);
  }
}

int cmd_gen_data(const std::filesystem::path& spec_path, std::ostream& out, std::ostream& err) {
  try {
    const std::string text = read_text_file(spec_path);
    const ConfigMap map = parse_config_text(text, spec_path.string());
    GaussianMixtureSpec spec;
    std::filesystem::path output;
    for (const auto& [key, entry] : map) {
      const std::string where = spec_path.string() + ":" + std::to_string(entry.line) + ": ";
      try {
        if (key == "classes") {
          spec.classes = std::stoi(entry.value);
        } else if (key == "dim") {
          spec.dim = std::stoi(entry.value);
        } else if (key == "per_class") {
          spec.per_class = std::stoi(entry.value);
        } else if (key == "separation") {
          spec.separation = std::stod(entry.value);
        } else if (key == "sigma") {
          spec.sigma_within = std::stod(entry.value);
        } else if (key == "seed") {
          spec.seed = std::stoull(entry.value);
        } else if (key == "output") {
          output = entry.value;
        } else {
          throw ConfigError(where + "unknown key '" + key + "'");
        }
      } catch (const std::logic_error& e) {
        if (dynamic_cast<const ConfigError*>(&e)) throw;
        throw ConfigError(where + "bad value '" + entry.value + "' for '" + key + "'");
      }
    }
    if (output.empty()) throw ConfigError(spec_path.string() + ": missing 'output'");
    if (spec.classes < 1 || spec.dim < 1 || spec.per_class < 1 || !(spec.sigma_within > 0.0) ||
        !(spec.separation >= 0.0)) {
      throw ConfigError(spec_path.string() + ": classes, dim, per_class must be positive, sigma > 0, separation >= 0");
    }
    const std::filesystem::path path = output.is_absolute() ? output : output_root(".") / output;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const Dataset data = gen_gaussian_mixture(spec);
    write_csv(path, data);
    out << "wrote " << data.size() << " samples to " << path.string() << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    return report_failure(e, err);
  }
}

std::vector<SweepPoint> parse_grid(const std::string& text, const std::string& source) {
  static const std::vector<std::string> allowed = {"loss.beta1", "loss.lambda", "loss.kappa1", "loss.eta1"};
  const ConfigMap map = parse_config_text(text, source);
  std::vector<std::pair<int, std::string>> order;
  for (const auto& [key, entry] : map) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(source + ":" + std::to_string(entry.line) + ": '" + key +
                        "' cannot be swept (loss.beta1, loss.lambda, loss.kappa1, loss.eta1)");
    }
    order.emplace_back(entry.line, key);
  }
  if (order.empty()) throw ConfigError(source + ": empty grid");
  std::sort(order.begin(), order.end());
  std::vector<SweepPoint> points{SweepPoint{}};
  for (const auto& [line, key] : order) {
    const std::vector<std::string> values = split_list(map.at(key).value);
    for (const std::string& v : values) {
      if (v.empty()) throw ConfigError(source + ":" + std::to_string(line) + ": empty value in list");
    }
    std::vector<SweepPoint> next;
    for (const SweepPoint& p : points) {
      for (const std::string& v : values) {
        SweepPoint q = p;
        q.overrides[key] = v;
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  return points;
}

int cmd_sweep(const std::filesystem::path& config_path, const std::filesystem::path& grid_path, std::ostream& out,
              std::ostream& err) {
  try {
    const ExperimentConfig base = load_config(config_path);
    const std::vector<SweepPoint> points = parse_grid(read_text_file(grid_path), grid_path.string());
    const std::filesystem::path root = run_directory(base);

    struct Row {
      std::size_t index;
      ExperimentConfig config;
      ForgettingReport report;
    };
    std::vector<Row> rows;
    for (std::size_t i = 0; i < points.size(); ++i) {
      ExperimentConfig config = base;
      for (const auto& [key, value] : points[i].overrides) {
        try {
          set_config_value(config, key, value);
        } catch (const ConfigError& e) {
          throw ConfigError(grid_path.string() + ": " + e.what());
        }
      }
      config.validate();
      RunOptions options;
      options.output_dir = root / ("point_" + std::to_string(i));
      options.timestamp = utc_timestamp();
      rows.push_back(Row{i, config, run_experiment(config, options).report});
      out << "point " << i << " config " << format_hash(rows.back().report.config_hash) << " avg_acc_except_first "
          << rows.back().report.avg_acc_except_first << '\n';
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
      return a.report.avg_acc_except_first > b.report.avg_acc_except_first;
    });
    std::ostringstream csv;
    csv.precision(17);
    csv << "point,config_hash,beta1,lambda,kappa1,eta1,final_acc,avg_acc_except_first\n";
    for (const Row& r : rows) {
      csv << r.index << ',' << format_hash(r.report.config_hash) << ',' << r.config.schedule.beta1 << ','
          << r.config.schedule.lambda << ',' << r.config.schedule.kappa1 << ',' << r.config.schedule.eta1 << ','
          << r.report.final_acc << ',' << r.report.avg_acc_except_first << '\n';
    }
    std::filesystem::create_directories(root);
    write_text_file(root / "sweep_summary.csv", csv.str());
    out << "summary " << (root / "sweep_summary.csv").string() << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    return report_failure(e, err);
  }
}

int cmd_report(const std::filesystem::path& dir, std::ostream& out, std::ostream& err) {
  try {
    ForgettingReport report;
    try {
      report = parse_report_json(read_text_file(dir / "report.json"));
    } catch (const DataError& e) {
      throw IoError(e.what());
    }
    write_text_file(dir / "report.csv", report_csv(report));
    out << "wrote " << (dir / "report.csv").string() << '\n';
    return kExitOk;
  } catch (const std::exception& e) {
    return report_failure(e, err);
  }
}

}  // namespace c4il
