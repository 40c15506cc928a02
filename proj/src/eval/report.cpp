#include "c4il/eval/report.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "c4il/errors.hpp"

namespace c4il {

namespace {

using Json = nlohmann::ordered_json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double number_from(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

std::uint64_t parse_hash(const std::string& text) {
  try {
    std::size_t used = 0;
    const std::uint64_t v = std::stoull(text, &used, 16);
    if (used != text.size()) throw DataError("report: malformed config hash '" + text + "'");
    return v;
  } catch (const std::logic_error&) {
    throw DataError("report: malformed config hash '" + text + "'");
  }
}

}  // namespace

std::string format_hash(std::uint64_t hash) {
  std::array<char, 17> buf{};
  std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(hash));
  return buf.data();
}

std::string report_json(const ForgettingReport& r) {
  Json j;
  j["method"] = r.method;
  j["config_hash"] = format_hash(r.config_hash);
  j["seed"] = r.seed;
  j["phases"] = r.phases;
  j["final_acc"] = number_or_null(r.final_acc);
  j["avg_acc_except_first"] = number_or_null(r.avg_acc_except_first);
  j["phase_accuracy"] = Json::array();
  for (double a : r.phase_accuracy) j["phase_accuracy"].push_back(number_or_null(a));
  j["separability"] = Json::array();
  for (Eigen::Index k = 0; k < r.separability.rows(); ++k) {
    Json row = Json::array();
    for (Eigen::Index t = 0; t < r.separability.cols(); ++t) row.push_back(number_or_null(r.separability(k, t)));
    j["separability"].push_back(row);
  }
  j["final_separability"] = Json::array();
  for (double a : r.final_separability) j["final_separability"].push_back(number_or_null(a));
  j["full_separability"] = number_or_null(r.full_separability);
  j["inter_phase_confusion_delta"] = number_or_null(r.inter_phase_confusion_delta);
  j["probe_accuracy"] = number_or_null(r.probe_accuracy);
  j["deployed_accuracy"] = number_or_null(r.deployed_accuracy);
  j["classifier_deviation_gap"] = number_or_null(r.classifier_deviation_gap);
  j["nme_accuracy"] = r.nme_accuracy ? number_or_null(*r.nme_accuracy) : Json(nullptr);
  j["timestamp"] = r.timestamp;
  return j.dump(2) + "\n";
}

ForgettingReport parse_report_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("report: invalid JSON: ") + e.what());
  }
  ForgettingReport r;
  try {
    r.method = j.at("method").get<std::string>();
    r.config_hash = parse_hash(j.at("config_hash").get<std::string>());
    r.seed = j.at("seed").get<std::uint64_t>();
    r.phases = j.at("phases").get<int>();
    r.final_acc = number_from(j.at("final_acc"));
    r.avg_acc_except_first = number_from(j.at("avg_acc_except_first"));
    for (const Json& a : j.at("phase_accuracy")) r.phase_accuracy.push_back(number_from(a));
    const Json& sep = j.at("separability");
    const auto rows = static_cast<Eigen::Index>(sep.size());
    const auto cols = rows > 0 ? static_cast<Eigen::Index>(sep.front().size()) : 0;
    r.separability.resize(rows, cols);
    for (Eigen::Index k = 0; k < rows; ++k) {
      const Json& row = sep.at(static_cast<std::size_t>(k));
      if (static_cast<Eigen::Index>(row.size()) != cols) throw DataError("report: ragged separability matrix");
      for (Eigen::Index t = 0; t < cols; ++t) r.separability(k, t) = number_from(row.at(static_cast<std::size_t>(t)));
    }
    for (const Json& a : j.at("final_separability")) r.final_separability.push_back(number_from(a));
    r.full_separability = number_from(j.at("full_separability"));
    r.inter_phase_confusion_delta = number_from(j.at("inter_phase_confusion_delta"));
    r.probe_accuracy = number_from(j.at("probe_accuracy"));
    r.deployed_accuracy = number_from(j.at("deployed_accuracy"));
    r.classifier_deviation_gap = number_from(j.at("classifier_deviation_gap"));
    if (!j.at("nme_accuracy").is_null()) r.nme_accuracy = j.at("nme_accuracy").get<double>();
    r.timestamp = j.value("timestamp", "");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("report: ") + e.what());
  }
  return r;
}

std::string report_csv(const ForgettingReport& r) {
  std::ostringstream out;
  out << "metric,phase,time,value\n";
  out << "config_hash,,," << format_hash(r.config_hash) << '\n';
  out << "seed,,," << r.seed << '\n';
  out << "final_acc,,," << format_double(r.final_acc) << '\n';
  out << "avg_acc_except_first,,," << format_double(r.avg_acc_except_first) << '\n';
  for (std::size_t t = 0; t < r.phase_accuracy.size(); ++t) {
    out << "phase_accuracy,," << t + 1 << ',' << format_double(r.phase_accuracy[t]) << '\n';
  }
  for (Eigen::Index k = 0; k < r.separability.rows(); ++k) {
    for (Eigen::Index t = k; t < r.separability.cols(); ++t) {
      out << "separability," << k + 1 << ',' << t + 1 << ',' << format_double(r.separability(k, t)) << '\n';
    }
  }
  for (std::size_t k = 0; k < r.final_separability.size(); ++k) {
    out << "final_separability," << k + 1 << ",," << format_double(r.final_separability[k]) << '\n';
  }
  out << "full_separability,,," << format_double(r.full_separability) << '\n';
  out << "inter_phase_confusion_delta,,," << format_double(r.inter_phase_confusion_delta) << '\n';
  out << "probe_accuracy,,," << format_double(r.probe_accuracy) << '\n';
  out << "deployed_accuracy,,," << format_double(r.deployed_accuracy) << '\n';
  out << "classifier_deviation_gap,,," << format_double(r.classifier_deviation_gap) << '\n';
  if (r.nme_accuracy) out << "nme_accuracy,,," << format_double(*r.nme_accuracy) << '\n';
  return out.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_representations_csv(std::ostream& out, std::span<const Sample> samples, const Matrix& reps) {
  if (static_cast<std::size_t>(reps.rows()) != samples.size()) {
    throw ShapeError("representation dump: row count mismatch");
  }
  out << "sample_id,label";
  for (Eigen::Index k = 0; k < reps.cols(); ++k) out << ",r" << k;
  out << '\n';
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out << samples[i].id << ',' << samples[i].label;
    for (Eigen::Index k = 0; k < reps.cols(); ++k) out << ',' << format_double(reps(static_cast<Eigen::Index>(i), k));
    out << '\n';
  }
}

}  // namespace c4il
