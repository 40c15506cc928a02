#pragma once

#include <span>
#include <vector>

#include "c4il/core/memory.hpp"
#include "c4il/data/sample.hpp"
#include "c4il/eval/probe.hpp"
#include "c4il/model/snapshot.hpp"

namespace c4il {

/// Encodes every sample of `samples` with `encoder`.
Matrix represent(const EncoderModel& encoder, std::span<const Sample> samples);

/// (k, t) = probe accuracy on phase-k data under the encoder saved after
/// phase t, for t >= k; entries with t < k are NaN. Needs one checkpoint per
/// phase pool (ProtocolError otherwise).
Matrix intra_phase_curve(std::span<const ModelSnapshot> checkpoints, std::span<const Dataset> phase_pools,
                         const ProbeOptions& options = {});

struct ConfusionResult {
  std::vector<double> per_phase;  // probe accuracy of each phase alone, fractions
  double mean_per_phase = 0.0;
  double full = 0.0;              // probe accuracy on the union of all phases
  double delta = 0.0;             // (mean_per_phase - full) in points
};

ConfusionResult confusion_delta(const EncoderModel& encoder, std::span<const Dataset> phase_pools,
                                const ProbeOptions& options = {});

struct DeviationResult {
  double probe = 0.0;     // retrained linear head, fraction
  double deployed = 0.0;  // heads as left by training, same held-out rows
  double gap = 0.0;       // (probe - deployed) in points
};

/// Both accuracies are measured on the probe's held-out split of `pool`.
DeviationResult deviation_gap(const EncoderModel& encoder, const ClassifierHeads& heads, const Dataset& pool,
                              const ProbeOptions& options = {});

struct CilAccuracies {
  std::vector<double> per_phase;
  double final_acc = 0.0;
  double avg_acc_except_first = 0.0;
};

/// Deployed-head accuracy after each phase t on the samples of phases 1..t,
/// predicting among the classes of phases 1..t. Checkpoint t is used for
/// time t; with fewer checkpoints than pools the last one stands in for the
/// remaining times (single-phase joint model scored on the nominal
/// partition). With a single pool the average equals the final accuracy.
CilAccuracies cil_accuracies(std::span<const ModelSnapshot> checkpoints, std::span<const Dataset> phase_pools);

/// Accuracy of `predicted` against the labels of `samples`.
double accuracy(std::span<const int> predicted, std::span<const Sample> samples);

/// Nearest mean of exemplars: class means of l2-normalized exemplar
/// representations, renormalized; queries go to the most cosine-similar mean,
/// ties to the lowest class id. DataError if a seen class has no exemplars.
std::vector<int> nme_classify(const EncoderModel& encoder, const MemoryBank& memory, const Matrix& queries);

}  // namespace c4il
