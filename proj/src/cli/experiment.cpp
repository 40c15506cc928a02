#include "c4il/cli/experiment.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>

#include "c4il/core/memory.hpp"
#include "c4il/data/io.hpp"
#include "c4il/data/stream.hpp"
#include "c4il/data/synthetic.hpp"
#include "c4il/eval/forgetting.hpp"
#include "c4il/model/checkpoint.hpp"

namespace c4il {

namespace {

enum Tag : std::uint64_t {
  kStreamTag = 0x5354524541ULL,
  kEncoderTag = 0x454e43ULL,
  kHeadTag = 0x48454144ULL,
  kTrainTag = 0x545241494eULL,
  kMemoryTag = 0x4d454dULL,
  kProbeTag = 0x50524f4245ULL,
};

std::vector<int> encoder_dims(const ExperimentConfig& config, int input_dim) {
  std::vector<int> dims{input_dim};
  dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
  dims.push_back(config.rep_dim);
  return dims;
}

Dataset concat(const std::vector<Dataset>& pools) {
  Dataset out;
  for (const Dataset& d : pools) out.insert(out.end(), d.begin(), d.end());
  return out;
}

std::string rng_text(const Rng& rng) {
  std::ostringstream ss;
  ss << rng;
  return ss.str();
}

}  // namespace

ExperimentData load_experiment_data(const ExperimentConfig& config) {
  ExperimentData out;
  switch (config.source) {
    case DataSource::synthetic: {
      GaussianMixtureSpec spec = config.synthetic;
      spec.per_class = config.synthetic.per_class + config.test_per_class;
      spec.seed = config.effective_data_seed();
      std::map<int, int> taken;
      for (Sample& s : gen_gaussian_mixture(spec)) {
        (taken[s.label]++ < config.synthetic.per_class ? out.train : out.test).push_back(std::move(s));
      }
      break;
    }
    case DataSource::csv:
      out.train = read_csv(config.resolve(config.train_path));
      out.test = read_csv(config.resolve(config.test_path));
      break;
    case DataSource::idx: {
      out.train = load_idx(config.resolve(config.train_images), config.resolve(config.train_labels));
      out.test = load_idx(config.resolve(config.test_images), config.resolve(config.test_labels));
      const auto offset = static_cast<std::int64_t>(out.train.size());
      for (Sample& s : out.test) s.id += offset;
      break;
    }
  }
  validate_dataset(out.train);
  validate_dataset(out.test);
  if (out.train.empty() || out.test.empty()) throw DataError("experiment: empty train or test set");
  if (config.standardize) {
    const Matrix x = stack_features(out.train);
    const RowVector mean = x.colwise().mean();
    RowVector scale = ((x.rowwise() - mean).array().square().colwise().mean()).sqrt().matrix();
    for (Eigen::Index j = 0; j < scale.size(); ++j) {
      if (scale(j) < kNormEpsilon) scale(j) = 1.0;
    }
    for (Dataset* part : {&out.train, &out.test}) {
      for (Sample& s : *part) s.features = ((s.features.transpose() - mean).array() / scale.array()).transpose();
    }
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  const std::uint64_t seed = config.seed;
  const std::uint64_t hash = config.hash();
  const ExperimentData data = load_experiment_data(config);

  const std::uint64_t stream_seed = derive_seed(seed, {kStreamTag});
  const CILStream nominal =
      config.phases >= 2 ? split_stream(data.train, config.phases, stream_seed) : joint_stream(data.train, stream_seed);
  const CILStream stream = config.training_phases() == 1 ? joint_stream(data.train, stream_seed) : nominal;

  ExperimentResult result;
  result.eval_pools = partition_like(nominal, data.test);

  const int input_dim = static_cast<int>(data.train.front().features.size());
  Rng init_rng = make_rng(seed, {kEncoderTag});
  Learner learner{EncoderModel(encoder_dims(config, input_dim), init_rng), ClassifierHeads(config.rep_dim)};

  std::optional<MemoryBank> memory;
  if (config.uses_memory()) memory.emplace(config.memory_capacity);

  const bool raster = data.train.front().is_raster();
  AugmentationPolicy policy;
  if (!config.augments()) {
    policy = AugmentationPolicy::identity(raster ? AugmentMode::raster : AugmentMode::vector);
  } else if (raster) {
    policy.mode = AugmentMode::raster;
  } else {
    policy = AugmentationPolicy::for_vectors(data.train, config.augment_noise, config.augment_mask);
  }

  TrainOptions train;
  train.epochs = config.epochs;
  train.batch_size = config.batch_size;
  train.sgd = SgdOptions{config.learning_rate, config.momentum, config.weight_decay};
  train.lr_decay_every = config.lr_decay_every;
  train.lr_decay_gamma = config.lr_decay_gamma;
  train.seed = derive_seed(seed, {kTrainTag});

  const LossSchedule schedule = config.effective_schedule();
  std::optional<ModelSnapshot> previous;
  std::set<std::int64_t> past_ids;
  int seen_classes = 0;

  for (std::size_t p = 0; p < stream.phase_count(); ++p) {
    const PhaseData& phase = stream.phases[p];
    const int t = static_cast<int>(p) + 1;
    Rng head_rng = make_rng(seed, {kHeadTag, static_cast<std::uint64_t>(t)});
    learner.heads.extend(phase.classes, head_rng);
    const int old_classes = seen_classes;
    seen_classes += static_cast<int>(phase.classes.size());

    PhaseContext ctx;
    ctx.phase = t;
    ctx.previous = previous;
    ctx.weights = weights_for_phase(schedule, t, old_classes, seen_classes);
    ctx.label_guidance = config.label_guidance();

    const Dataset replay = memory ? memory->samples() : Dataset{};
    AuditedPool pool(phase.samples, replay);
    const PhaseResult trained = train_phase(learner, ctx, pool, policy, train);
    result.log.insert(result.log.end(), trained.log.begin(), trained.log.end());

    std::set<std::int64_t> forbidden = past_ids;
    for (const Sample& s : replay) forbidden.erase(s.id);
    std::set<std::int64_t> replay_ids;
    for (const Sample& s : replay) replay_ids.insert(s.id);
    result.audit.push_back(PhaseAudit{t, trained.samples_read, trained.distinct_samples,
                                      pool.touched_in(replay_ids), pool.touched_in(forbidden)});

    previous = snapshot(learner.encoder, learner.heads);
    result.checkpoints.push_back(*previous);
    if (memory) memory->update(phase.samples, derive_seed(seed, {kMemoryTag, static_cast<std::uint64_t>(t)}));
    for (const Sample& s : phase.samples) past_ids.insert(s.id);

    if (options.output_dir) {
      std::filesystem::create_directories(*options.output_dir);
      const Checkpoint ckpt{learner.encoder, learner.heads, static_cast<std::uint32_t>(t), hash, rng_text(head_rng)};
      save_checkpoint(*options.output_dir / ("checkpoint_phase" + std::to_string(t) + ".bin"), ckpt);
    }
  }

  ProbeOptions probe;
  probe.seed = derive_seed(seed, {kProbeTag});
  probe.max_iterations = config.probe_iterations;

  ForgettingReport& report = result.report;
  report.method = method_name(config.method);
  report.config_hash = hash;
  report.seed = seed;
  report.phases = static_cast<int>(stream.phase_count());
  report.timestamp = options.timestamp;

  const CilAccuracies acc = cil_accuracies(result.checkpoints, result.eval_pools);
  report.final_acc = acc.final_acc;
  report.avg_acc_except_first = acc.avg_acc_except_first;
  report.phase_accuracy = acc.per_phase;

  if (result.checkpoints.size() == result.eval_pools.size() && result.eval_pools.size() > 1) {
    report.separability = intra_phase_curve(result.checkpoints, result.eval_pools, probe);
  }
  const ConfusionResult confusion = confusion_delta(learner.encoder, result.eval_pools, probe);
  report.final_separability = confusion.per_phase;
  report.full_separability = confusion.full;
  report.inter_phase_confusion_delta = confusion.delta;

  const DeviationResult deviation = deviation_gap(learner.encoder, learner.heads, data.test, probe);
  report.probe_accuracy = deviation.probe;
  report.deployed_accuracy = deviation.deployed;
  report.classifier_deviation_gap = deviation.gap;

  if (memory && config.eval_nme) {
    const std::vector<int> predicted = nme_classify(learner.encoder, *memory, stack_features(data.test));
    report.nme_accuracy = accuracy(predicted, data.test);
  }

  if (options.output_dir) {
    write_artifacts(*options.output_dir, config, result);
    std::ofstream reps(*options.output_dir / "representations.csv", std::ios::trunc);
    if (!reps) throw IoError("cannot write representations.csv");
    reps << "# config_hash=" << format_hash(hash) << '\n';
    const Dataset all_test = concat(result.eval_pools);
    write_representations_csv(reps, all_test, represent(learner.encoder, all_test));
  }
  return result;
}

std::string phase_log_csv(std::uint64_t config_hash, const std::vector<EpochLog>& log) {
  std::ostringstream out;
  out.precision(17);
  out << "# config_hash=" << format_hash(config_hash) << '\n';
  out << "phase,epoch,l_ce,l_con,l_kd,l_rld,total,train_acc\n";
  for (const EpochLog& e : log) {
    out << e.phase << ',' << e.epoch << ',' << e.loss.ce << ',' << e.loss.con << ',' << e.loss.kd << ','
        << e.loss.rld << ',' << e.loss.total << ',' << e.train_acc << '\n';
  }
  return out.str();
}

void write_artifacts(const std::filesystem::path& dir, const ExperimentConfig& config,
                     const ExperimentResult& result) {
  std::filesystem::create_directories(dir);
  const std::uint64_t hash = config.hash();
  write_text_file(dir / "phase_log.csv", phase_log_csv(hash, result.log));
  std::ostringstream audit;
  audit << "# config_hash=" << format_hash(hash) << '\n';
  audit << "phase,samples_read,distinct_samples,memory_reads,forbidden_reads\n";
  for (const PhaseAudit& a : result.audit) {
    audit << a.phase << ',' << a.samples_read << ',' << a.distinct_samples << ',' << a.memory_reads << ','
          << a.forbidden_reads << '\n';
  }
  write_text_file(dir / "audit.csv", audit.str());
  write_text_file(dir / "config.txt", "# config_hash=" + format_hash(hash) + "\n" + config.canonical());
  write_text_file(dir / "report.json", report_json(result.report));
  write_text_file(dir / "report.csv", report_csv(result.report));
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace c4il
