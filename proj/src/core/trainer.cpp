#include "c4il/core/trainer.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <string>

#include "c4il/core/losses.hpp"
#include "c4il/numerics/ops.hpp"

namespace c4il {

void PhaseContext::validate() const {
  if (phase < 1) throw ProtocolError("phase context: phases are numbered from 1");
  if (phase == 1 && previous) throw ProtocolError("phase context: phase 1 cannot have a previous model");
  if (phase >= 2 && !previous) {
    throw ProtocolError("phase context: phase " + std::to_string(phase) + " needs the previous-phase snapshot");
  }
}

namespace {

Var accumulate_term(Tape& tape, std::optional<Var>& total, Var term, double weight) {
  const Var weighted = weight == 1.0 ? term : scale(tape, term, weight);
  total = total ? add(tape, *total, weighted) : weighted;
  return *total;
}

}  // namespace

StepResult combined_loss(const Learner& learner, const PhaseContext& ctx, const TrainingBatch& batch,
                         LossTerms terms) {
  ctx.validate();
  const auto rows = static_cast<Eigen::Index>(batch.size());
  if (rows < 2) throw DataError("combined_loss: batch needs at least 2 rows");
  const LossWeights& w = ctx.weights;
  const bool later = ctx.phase >= 2;
  const bool use_con = terms.con && w.beta != 0.0;
  const bool use_kd = terms.kd && later && w.kappa != 0.0;
  const bool use_rld = terms.rld && later && w.eta != 0.0;

  Tape tape;
  Var input;
  if (use_con) {
    Matrix stacked(2 * rows, batch.original.cols());
    stacked << batch.original, batch.augmented;
    input = tape.constant(std::move(stacked));
  } else {
    input = tape.constant(batch.original);
  }
  const auto enc = learner.encoder.encode(tape, input, true);
  const Var reps = use_con ? slice_rows(tape, enc.output, 0, rows) : enc.output;
  const HeadRange all = learner.heads.scope(HeadScope::all_seen);
  const auto head = learner.heads.logits(tape, reps, all, true);

  std::vector<int> columns;
  columns.reserve(batch.labels.size());
  for (int y : batch.labels) columns.push_back(learner.heads.column_of(y));

  StepResult out;
  std::optional<Var> total;

  if (terms.ce) {
    const Var ce = l_ce(tape, head.logits, columns);
    out.loss.ce = tape.scalar(ce);
    accumulate_term(tape, total, ce, 1.0);
  }
  if (use_con) {
    std::vector<int> labels2(batch.labels);
    labels2.insert(labels2.end(), batch.labels.begin(), batch.labels.end());
    const Var con = l_con(tape, enc.output, labels2, stacked_twins(batch.size()), ctx.label_guidance);
    out.loss.con = tape.scalar(con);
    accumulate_term(tape, total, con, w.beta);
  }
  if (use_kd) {
    const ModelSnapshot& prev = *ctx.previous;
    const HeadRange old = learner.heads.old_heads();
    if (prev.heads().head_count() != old.count) {
      throw ProtocolError("l_kd: snapshot has " + std::to_string(prev.heads().head_count()) + " heads, expected " +
                          std::to_string(old.count));
    }
    const Matrix prev_probs = prev.heads().classify(prev.encode(batch.original), HeadScope::all_seen);
    const Var old_logits = slice_cols(tape, head.logits, 0, learner.heads.class_count(old));
    const Var kd = l_kd(tape, old_logits, prev_probs);
    out.loss.kd = tape.scalar(kd);
    accumulate_term(tape, total, kd, w.kappa);
  }
  if (use_rld) {
    const Var rld = l_rld(tape, reps, ctx.previous->encode(batch.original));
    out.loss.rld = tape.scalar(rld);
    accumulate_term(tape, total, rld, w.eta);
  }

  const Matrix& logits = tape.value(head.logits);
  const Eigen::VectorXi pred = argmax_rows(logits);
  for (Eigen::Index i = 0; i < rows; ++i) out.correct += pred(i) == columns[static_cast<std::size_t>(i)] ? 1 : 0;

  if (total) {
    out.loss.total = tape.scalar(*total);
    tape.backward(*total);
  }
  for (Var p : enc.params) out.encoder_grads.push_back(tape.grad(p));
  for (Var p : head.params) out.head_grads.push_back(tape.grad(p));
  return out;
}

PhaseResult train_phase(Learner& learner, const PhaseContext& ctx, AuditedPool& pool,
                        const AugmentationPolicy& policy, const TrainOptions& options) {
  ctx.validate();
  if (options.epochs < 0) throw ConfigError("train_phase: epochs must be >= 0");
  if (options.batch_size < 2) throw ConfigError("train_phase: batch size must be at least 2");
  const std::vector<int> pool_labels = pool.labels();
  if (pool_labels.empty()) throw DataError("train_phase: empty training pool");
  const std::set<int> classes(pool_labels.begin(), pool_labels.end());
  for (int c : classes) {
    if (!learner.heads.knows(c)) throw LabelError("train_phase: class " + std::to_string(c) + " has no head");
  }
  if (ctx.weights.beta != 0.0 && classes.size() < 2) {
    throw ConfigError("train_phase: the contrastive term needs at least 2 classes in the pool");
  }

  PhaseResult result;
  std::vector<Matrix> enc_velocity;
  std::vector<Matrix> head_velocity;
  const std::size_t batches = (pool.size() + options.batch_size - 1) / options.batch_size;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    SgdOptions sgd = options.sgd;
    sgd.learning_rate = step_decay(options.sgd.learning_rate, epoch, options.lr_decay_every, options.lr_decay_gamma);
    EpochLog log;
    log.phase = ctx.phase;
    log.epoch = epoch + 1;
    std::size_t seen = 0;
    std::size_t correct = 0;
    for (std::size_t k = 0; k < batches; ++k) {
      Rng rng = make_rng(options.seed, {static_cast<std::uint64_t>(ctx.phase), static_cast<std::uint64_t>(epoch), k});
      const TrainingBatch batch = build_training_batch(pool, options.batch_size, policy, rng);
      const StepResult step = combined_loss(learner, ctx, batch);
      sgd_step(learner.encoder.parameters(), step.encoder_grads, enc_velocity, sgd);
      sgd_step(learner.heads.parameters(), step.head_grads, head_velocity, sgd);
      log.loss.ce += step.loss.ce;
      log.loss.con += step.loss.con;
      log.loss.kd += step.loss.kd;
      log.loss.rld += step.loss.rld;
      log.loss.total += step.loss.total;
      seen += batch.size();
      correct += step.correct;
    }
    const double nb = static_cast<double>(batches);
    log.loss.ce /= nb;
    log.loss.con /= nb;
    log.loss.kd /= nb;
    log.loss.rld /= nb;
    log.loss.total /= nb;
    log.train_acc = seen ? static_cast<double>(correct) / static_cast<double>(seen) : 0.0;
    result.log.push_back(log);
  }
  result.samples_read = pool.read_count();
  result.distinct_samples = pool.touched().size();
  return result;
}

}  // namespace c4il
