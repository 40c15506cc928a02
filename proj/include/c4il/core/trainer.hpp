#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "c4il/core/weights.hpp"
#include "c4il/data/batch.hpp"
#include "c4il/model/snapshot.hpp"
#include "c4il/numerics/sgd.hpp"

namespace c4il {

/// The trainable model: shared encoder plus the growing set of heads.
struct Learner {
  EncoderModel encoder;
  ClassifierHeads heads;
};

/// Everything that varies per phase besides the model itself.
struct PhaseContext {
  int phase = 1;                          // 1-based
  std::optional<ModelSnapshot> previous;  // frozen model from the end of phase - 1
  LossWeights weights;
  bool label_guidance = true;             // same-class rows count as positives

  /// Throws ProtocolError unless the snapshot is present exactly when phase >= 2.
  void validate() const;
};

/// Which terms of the combined objective to evaluate; used to isolate a single
/// component when checking that gradients add up.
struct LossTerms {
  bool ce = true;
  bool con = true;
  bool kd = true;
  bool rld = true;
};

struct LossBreakdown {
  double ce = 0.0;
  double con = 0.0;
  double kd = 0.0;
  double rld = 0.0;
  double total = 0.0;
};

struct StepResult {
  LossBreakdown loss;
  std::vector<Matrix> encoder_grads;  // parameters() order
  std::vector<Matrix> head_grads;     // one per head
  std::size_t correct = 0;            // arg-max hits on the original rows
};

/// L = L_ce + beta L_con + kappa L_kd + eta L_rld with a single backward pass.
/// Terms whose weight is zero are not evaluated; at phase 1 the kd and rld
/// terms are skipped regardless of their weights. L_con runs on the 2B rows
/// [original; augmented], the other terms on the B original rows.
StepResult combined_loss(const Learner& learner, const PhaseContext& ctx, const TrainingBatch& batch,
                         LossTerms terms = {});

struct TrainOptions {
  int epochs = 30;
  std::size_t batch_size = 64;
  SgdOptions sgd;
  int lr_decay_every = 0;  // epochs; 0 keeps the rate fixed
  double lr_decay_gamma = 0.1;
  std::uint64_t seed = 0;
};

struct EpochLog {
  int phase = 0;
  int epoch = 0;
  LossBreakdown loss;  // means over the epoch's batches
  double train_acc = 0.0;
};

struct PhaseResult {
  std::vector<EpochLog> log;
  std::size_t samples_read = 0;
  std::size_t distinct_samples = 0;
};

/// Runs `options.epochs` epochs over the pool. Each epoch draws
/// ceil(|pool| / batch_size) batches; batch k of epoch e in phase t depends
/// only on (seed, t, e, k). Requires heads for the phase's classes to exist.
PhaseResult train_phase(Learner& learner, const PhaseContext& ctx, AuditedPool& pool,
                        const AugmentationPolicy& policy, const TrainOptions& options);

}  // namespace c4il
