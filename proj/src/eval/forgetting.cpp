#include "c4il/eval/forgetting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "c4il/errors.hpp"

namespace c4il {

Matrix represent(const EncoderModel& encoder, std::span<const Sample> samples) {
  if (samples.empty()) return Matrix(0, encoder.output_dim());
  return encoder.encode(stack_features(samples));
}

namespace {

double probe_accuracy(const EncoderModel& encoder, std::span<const Sample> samples, const ProbeOptions& options) {
  const std::vector<int> labels = labels_of(samples);
  return linear_probe(represent(encoder, samples), labels, options).accuracy;
}

Dataset concat(std::span<const Dataset> pools, std::size_t upto) {
  Dataset out;
  for (std::size_t k = 0; k < upto; ++k) out.insert(out.end(), pools[k].begin(), pools[k].end());
  return out;
}

std::vector<int> predict_among(const ClassifierHeads& heads, const Matrix& reps, const std::set<int>& allowed) {
  const Matrix logits = heads.logits(reps, heads.scope(HeadScope::all_seen));
  std::vector<Eigen::Index> columns;
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    if (allowed.contains(heads.class_at(static_cast<int>(j)))) columns.push_back(j);
  }
  if (columns.empty()) throw ProtocolError("cil_accuracies: the model has no head for any evaluated class");
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index best = columns.front();
    for (Eigen::Index j : columns) {
      if (logits(i, j) > logits(i, best)) best = j;
    }
    out[static_cast<std::size_t>(i)] = heads.class_at(static_cast<int>(best));
  }
  return out;
}

}  // namespace

Matrix intra_phase_curve(std::span<const ModelSnapshot> checkpoints, std::span<const Dataset> phase_pools,
                         const ProbeOptions& options) {
  const std::size_t n = phase_pools.size();
  if (checkpoints.size() != n) {
    throw ProtocolError("intra_phase_curve: expected " + std::to_string(n) + " checkpoints, got " +
                        std::to_string(checkpoints.size()));
  }
  const auto size = static_cast<Eigen::Index>(n);
  Matrix curve = Matrix::Constant(size, size, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t t = k; t < n; ++t) {
      curve(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t)) =
          probe_accuracy(checkpoints[t].encoder(), phase_pools[k], options);
    }
  }
  return curve;
}

ConfusionResult confusion_delta(const EncoderModel& encoder, std::span<const Dataset> phase_pools,
                                const ProbeOptions& options) {
  if (phase_pools.empty()) throw ProtocolError("confusion_delta: no phases");
  ConfusionResult out;
  for (const Dataset& pool : phase_pools) out.per_phase.push_back(probe_accuracy(encoder, pool, options));
  double sum = 0.0;
  for (double a : out.per_phase) sum += a;
  out.mean_per_phase = sum / static_cast<double>(out.per_phase.size());
  out.full = probe_accuracy(encoder, concat(phase_pools, phase_pools.size()), options);
  out.delta = 100.0 * (out.mean_per_phase - out.full);
  return out;
}

DeviationResult deviation_gap(const EncoderModel& encoder, const ClassifierHeads& heads, const Dataset& pool,
                              const ProbeOptions& options) {
  const std::vector<int> labels = labels_of(pool);
  const Matrix reps = represent(encoder, pool);
  DeviationResult out;
  out.probe = linear_probe(reps, labels, options).accuracy;

  const SplitIndices split = stratified_split(labels, options.train_fraction, options.seed);
  if (split.test.empty()) throw DataError("deviation_gap: empty held-out split");
  Matrix held(static_cast<Eigen::Index>(split.test.size()), reps.cols());
  std::size_t hits = 0;
  for (std::size_t r = 0; r < split.test.size(); ++r) {
    held.row(static_cast<Eigen::Index>(r)) = reps.row(static_cast<Eigen::Index>(split.test[r]));
  }
  const std::vector<int> predicted = heads.predict(held);
  for (std::size_t r = 0; r < split.test.size(); ++r) hits += predicted[r] == labels[split.test[r]] ? 1 : 0;
  out.deployed = static_cast<double>(hits) / static_cast<double>(split.test.size());
  out.gap = 100.0 * (out.probe - out.deployed);
  return out;
}

double accuracy(std::span<const int> predicted, std::span<const Sample> samples) {
  if (predicted.size() != samples.size()) throw ShapeError("accuracy: prediction count mismatch");
  if (samples.empty()) throw DataError("accuracy: no samples");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) hits += predicted[i] == samples[i].label ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

CilAccuracies cil_accuracies(std::span<const ModelSnapshot> checkpoints, std::span<const Dataset> phase_pools) {
  if (phase_pools.empty()) throw ProtocolError("cil_accuracies: no phases");
  if (checkpoints.empty()) throw ProtocolError("cil_accuracies: missing checkpoint");
  if (checkpoints.size() > phase_pools.size()) throw ProtocolError("cil_accuracies: more checkpoints than phases");
  CilAccuracies out;
  std::set<int> allowed;
  for (std::size_t t = 0; t < phase_pools.size(); ++t) {
    for (const Sample& s : phase_pools[t]) allowed.insert(s.label);
    const ModelSnapshot& model = checkpoints[std::min(t, checkpoints.size() - 1)];
    const Dataset seen = concat(phase_pools, t + 1);
    const std::vector<int> predicted = predict_among(model.heads(), represent(model.encoder(), seen), allowed);
    out.per_phase.push_back(accuracy(predicted, seen));
  }
  out.final_acc = out.per_phase.back();
  if (out.per_phase.size() == 1) {
    out.avg_acc_except_first = out.final_acc;
  } else {
    double sum = 0.0;
    for (std::size_t t = 1; t < out.per_phase.size(); ++t) sum += out.per_phase[t];
    out.avg_acc_except_first = sum / static_cast<double>(out.per_phase.size() - 1);
  }
  return out;
}

std::vector<int> nme_classify(const EncoderModel& encoder, const MemoryBank& memory, const Matrix& queries) {
  const auto counts = memory.counts();
  if (counts.empty()) throw DataError("nme_classify: memory bank is empty");
  std::vector<int> classes;
  Matrix means(static_cast<Eigen::Index>(counts.size()), encoder.output_dim());
  Eigen::Index row = 0;
  for (const auto& [c, count] : counts) {
    if (count == 0) throw DataError("nme_classify: class " + std::to_string(c) + " has no exemplars");
    const Matrix reps = l2_normalized_rows(represent(encoder, memory.store().at(c)));
    const RowVector mean = reps.colwise().mean();
    const double norm = mean.norm();
    if (norm < kNormEpsilon) throw DegenerateVectorError("nme_classify: class " + std::to_string(c) + " mean is zero");
    means.row(row++) = mean / norm;
    classes.push_back(c);
  }
  const Matrix q = l2_normalized_rows(encoder.encode(queries));
  const Eigen::VectorXi best = argmax_rows(q * means.transpose());
  std::vector<int> out(static_cast<std::size_t>(best.size()));
  for (Eigen::Index i = 0; i < best.size(); ++i) out[static_cast<std::size_t>(i)] = classes[static_cast<std::size_t>(best(i))];
  return out;
}

}  // namespace c4il
