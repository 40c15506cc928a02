#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

#include "c4il/core/memory.hpp"
#include "c4il/core/trainer.hpp"
#include "c4il/data/synthetic.hpp"
#include "c4il/eval/forgetting.hpp"
#include "c4il/eval/probe.hpp"
#include "c4il/eval/report.hpp"

namespace c4il {
namespace {

EncoderModel identity_encoder(int dim) {
  return EncoderModel({dim, dim}, {Matrix::Identity(dim, dim), Matrix::Zero(1, dim)}, Activation::identity);
}

Dataset blobs(const Matrix& means, int per_class, double sigma, std::uint64_t seed, std::int64_t first_id = 0) {
  Rng rng = make_rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  Dataset out;
  std::int64_t id = first_id;
  for (Eigen::Index c = 0; c < means.rows(); ++c) {
    for (int i = 0; i < per_class; ++i) {
      Sample s;
      s.id = id++;
      s.label = static_cast<int>(c);
      s.features = means.row(c).transpose();
      for (Eigen::Index k = 0; k < s.features.size(); ++k) s.features(k) += noise(rng);
      out.push_back(s);
    }
  }
  return out;
}

Dataset only_labels(const Dataset& data, std::initializer_list<int> labels) {
  Dataset out;
  for (const Sample& s : data) {
    if (std::find(labels.begin(), labels.end(), s.label) != labels.end()) out.push_back(s);
  }
  return out;
}

TEST(Split, StratifiedAndDeterministic) {
  std::vector<int> labels;
  for (int c = 0; c < 3; ++c) labels.insert(labels.end(), 10, c);
  const SplitIndices a = stratified_split(labels, 0.8, 5);
  const SplitIndices b = stratified_split(labels, 0.8, 5);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(a.train.size(), 24u);
  EXPECT_EQ(a.test.size(), 6u);
  std::map<int, int> train_counts;
  for (std::size_t i : a.train) ++train_counts[labels[i]];
  for (const auto& [c, n] : train_counts) EXPECT_EQ(n, 8) << c;
  std::vector<int> tiny{0, 0, 1, 1};
  const SplitIndices t = stratified_split(tiny, 0.99, 1);
  EXPECT_EQ(t.test.size(), 2u);
}

TEST(Probe, SeparableRepresentationsScorePerfectly) {
  Matrix means(2, 2);
  means << -3.0, 0.0, 3.0, 0.0;
  const Dataset data = blobs(means, 50, 0.5, 1);
  const ProbeResult r = linear_probe(stack_features(data), labels_of(data));
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.classes, (std::vector<int>{0, 1}));
}

TEST(Probe, PermutedLabelsScoreAtChance) {
  Matrix means(4, 3);
  means << 2, 0, 0, 0, 2, 0, 0, 0, 2, -2, -2, -2;
  const Dataset data = blobs(means, 200, 1.0, 2);
  std::vector<int> labels = labels_of(data);
  Rng rng = make_rng(3);
  seeded_shuffle(labels, rng);
  const ProbeResult r = linear_probe(stack_features(data), labels);
  const double n = 0.2 * static_cast<double>(data.size());
  const double sigma = std::sqrt(0.25 * 0.75 / n);
  EXPECT_LT(std::abs(r.accuracy - 0.25), 3.0 * sigma);
}

TEST(Probe, InvariantToRepresentationScale) {
  Matrix means(3, 4);
  means << 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0;
  const Dataset data = blobs(means, 100, 0.6, 4);
  const Matrix x = stack_features(data);
  const std::vector<int> labels = labels_of(data);
  const double base = linear_probe(x, labels).accuracy;
  EXPECT_NEAR(linear_probe(10.0 * x, labels).accuracy, base, 0.005);
}

TEST(Probe, ConvergesAndReportsDiagnostics) {
  Matrix means(2, 2);
  means << 0.0, 0.0, 1.0, 1.0;
  const Dataset data = blobs(means, 80, 0.7, 5);
  const ProbeResult r = linear_probe(stack_features(data), labels_of(data));
  EXPECT_GT(r.iterations, 0);
  EXPECT_LE(r.iterations, 2000);
  EXPECT_TRUE(std::isfinite(r.final_loss));
  EXPECT_EQ(r.weights.cols(), 2);
  EXPECT_EQ(r.bias.size(), 2);
}

TEST(Probe, SingleClassRejected) {
  const std::vector<int> labels(10, 3);
  EXPECT_THROW(linear_probe(Matrix::Ones(10, 2), labels), DataError);
}

TEST(IntraPhaseCurve, UpperTriangleWithPerPhaseDiagonal) {
  Matrix means(4, 2);
  means << -4, 0, 4, 0, 0, -4, 0, 4;
  const Dataset data = blobs(means, 40, 1.0, 6);
  const std::vector<Dataset> pools{only_labels(data, {0, 1}), only_labels(data, {2, 3})};
  const EncoderModel enc = identity_encoder(2);
  const std::vector<ModelSnapshot> ckpts{snapshot(enc, ClassifierHeads(2)), snapshot(enc, ClassifierHeads(2))};
  const Matrix curve = intra_phase_curve(ckpts, pools);
  EXPECT_TRUE(std::isnan(curve(1, 0)));
  for (int k = 0; k < 2; ++k) {
    const double own = linear_probe(represent(enc, pools[static_cast<std::size_t>(k)]),
                                    labels_of(pools[static_cast<std::size_t>(k)]))
                           .accuracy;
    EXPECT_EQ(curve(k, k), own);
  }
  EXPECT_EQ(curve(0, 1), curve(0, 0));
  EXPECT_THROW(intra_phase_curve(std::vector<ModelSnapshot>{ckpts[0]}, pools), ProtocolError);
}

TEST(ConfusionDelta, ZeroForOrthogonallyEmbeddedPhases) {
  Matrix means(4, 4);
  means << 50, 0, 0, 0, 0, 50, 0, 0, 0, 0, 50, 0, 0, 0, 0, 50;
  const Dataset data = blobs(means, 40, 1.0, 7);
  const std::vector<Dataset> pools{only_labels(data, {0, 1}), only_labels(data, {2, 3})};
  const ConfusionResult r = confusion_delta(identity_encoder(4), pools);
  EXPECT_EQ(r.mean_per_phase, 1.0);
  EXPECT_EQ(r.full, 1.0);
  EXPECT_EQ(r.delta, 0.0);
}

TEST(ConfusionDelta, PositiveWhenPhasesOverlap) {
  // Each phase is separable on its own, but class 0 sits on top of class 2.
  Matrix means(4, 2);
  means << -3, 0, 3, 0, -3, 0.2, 3, 0.2;
  const Dataset data = blobs(means, 60, 0.3, 8);
  const std::vector<Dataset> pools{only_labels(data, {0, 1}), only_labels(data, {2, 3})};
  EXPECT_GT(confusion_delta(identity_encoder(2), pools).delta, 10.0);
}

TEST(DeviationGap, JointlyTrainedModelHasSmallGap) {
  const Dataset train = gen_gaussian_mixture(GaussianMixtureSpec{3, 4, 150, 4.0, 1.0, 9});
  Rng rng = make_rng(10);
  Learner learner{EncoderModel({4, 16, 8}, rng), ClassifierHeads(8)};
  learner.heads.extend(std::vector<int>{0, 1, 2}, rng);
  AuditedPool pool(train, {});
  TrainOptions opts;
  opts.epochs = 40;
  opts.batch_size = 32;
  opts.sgd = SgdOptions{0.002, 0.9, 0.0};
  train_phase(learner, PhaseContext{}, pool, AugmentationPolicy::identity(AugmentMode::vector), opts);
  GaussianMixtureSpec test_spec{3, 4, 250, 4.0, 1.0, 9};
  Dataset test;
  const Dataset all = gen_gaussian_mixture(test_spec);
  std::map<int, int> taken;
  for (const Sample& s : all) {
    if (taken[s.label]++ >= 150) test.push_back(s);
  }
  const DeviationResult r = deviation_gap(learner.encoder, learner.heads, test);
  EXPECT_LE(std::abs(r.gap), 3.0);
  EXPECT_NEAR(r.gap, 100.0 * (r.probe - r.deployed), 1e-12);
}

TEST(CilAccuracies, DefinitionsOnHandModel) {
  // Identity encoder, heads that score class c by the c-th coordinate.
  const EncoderModel enc = identity_encoder(4);
  Matrix means(4, 4);
  means.setIdentity();
  means *= 5.0;
  const Dataset data = blobs(means, 10, 0.1, 11);
  const std::vector<Dataset> pools{only_labels(data, {0, 1}), only_labels(data, {2, 3})};
  ClassifierHeads phase1(4);
  Matrix w1 = Matrix::Zero(4, 2);
  w1(0, 0) = w1(1, 1) = 1.0;
  phase1.extend(std::vector<int>{0, 1}, w1);
  ClassifierHeads phase2 = phase1;
  // The second head always wins, so old classes are lost after phase 2.
  Matrix w2 = Matrix::Zero(4, 2);
  w2(2, 0) = w2(3, 1) = 1.0;
  w2.row(0) << 0.0, 10.0;
  w2.row(1) << 0.0, 10.0;
  phase2.extend(std::vector<int>{2, 3}, w2);
  const std::vector<ModelSnapshot> ckpts{snapshot(enc, phase1), snapshot(enc, phase2)};
  const CilAccuracies acc = cil_accuracies(ckpts, pools);
  ASSERT_EQ(acc.per_phase.size(), 2u);
  EXPECT_EQ(acc.per_phase[0], 1.0);
  EXPECT_EQ(acc.per_phase[1], 0.5);
  EXPECT_EQ(acc.final_acc, 0.5);
  EXPECT_EQ(acc.avg_acc_except_first, acc.per_phase[1]);

  const CilAccuracies joint = cil_accuracies(std::vector<ModelSnapshot>{ckpts[1]}, pools);
  EXPECT_EQ(joint.per_phase[0], 1.0);
  const CilAccuracies single =
      cil_accuracies(std::vector<ModelSnapshot>{ckpts[0]}, std::vector<Dataset>{pools[0]});
  EXPECT_EQ(single.avg_acc_except_first, single.final_acc);
}

TEST(Nme, ExemplarQueryAndAntipodalMeans) {
  const EncoderModel enc = identity_encoder(2);
  MemoryBank bank(4);
  Dataset data;
  for (int i = 0; i < 4; ++i) {
    Sample s;
    s.id = i;
    s.label = i < 2 ? 0 : 1;
    s.features = Vector::Constant(2, i < 2 ? 1.0 : -1.0);
    s.features(0) += 0.1 * i;
    data.push_back(s);
  }
  bank.update(data, 1);
  Matrix q(3, 2);
  q.row(0) = data[0].features.transpose();
  q.row(1) << 1.0, 1.0;
  q.row(2) << -1.0, -1.0;
  EXPECT_EQ(nme_classify(enc, bank, q), (std::vector<int>{0, 0, 1}));
}

TEST(Nme, ClassWithoutExemplarsRejected) {
  MemoryBank bank(1);
  Dataset data;
  for (int c = 0; c < 2; ++c) {
    Sample s;
    s.id = c;
    s.label = c;
    s.features = Vector::Ones(2);
    data.push_back(s);
  }
  bank.update(data, 2);
  EXPECT_THROW(nme_classify(identity_encoder(2), bank, Matrix::Ones(1, 2)), DataError);
}

TEST(Nme, TracksDeployedHeadOnSeparatedToy) {
  const Dataset all = gen_gaussian_mixture(GaussianMixtureSpec{2, 2, 300, 10.0, 1.0, 12});
  Dataset train, test;
  std::map<int, int> taken;
  for (const Sample& s : all) (taken[s.label]++ < 200 ? train : test).push_back(s);
  Rng rng = make_rng(13);
  Learner learner{EncoderModel({2, 16, 8}, rng), ClassifierHeads(8)};
  learner.heads.extend(std::vector<int>{0, 1}, rng);
  AuditedPool pool(train, {});
  TrainOptions opts;
  opts.epochs = 20;
  opts.batch_size = 32;
  opts.sgd = SgdOptions{0.001, 0.9, 0.0};
  train_phase(learner, PhaseContext{}, pool, AugmentationPolicy::identity(AugmentMode::vector), opts);
  MemoryBank bank(100);
  bank.update(train, 14);
  const double nme = accuracy(nme_classify(learner.encoder, bank, stack_features(test)), test);
  const double deployed = accuracy(learner.heads.predict(represent(learner.encoder, test)), test);
  EXPECT_LE(std::abs(nme - deployed), 0.02);
}

ForgettingReport sample_report() {
  ForgettingReport r;
  r.method = "c4il-mem";
  r.config_hash = 0x0123456789abcdefULL;
  r.seed = 3;
  r.phases = 2;
  r.final_acc = 0.75;
  r.avg_acc_except_first = 0.75;
  r.phase_accuracy = {0.9, 0.75};
  r.separability = Matrix::Constant(2, 2, std::numeric_limits<double>::quiet_NaN());
  r.separability(0, 0) = 0.95;
  r.separability(0, 1) = 0.9;
  r.separability(1, 1) = 0.97;
  r.final_separability = {0.9, 0.97};
  r.full_separability = 0.8;
  r.inter_phase_confusion_delta = 13.5;
  r.probe_accuracy = 0.8;
  r.deployed_accuracy = 0.75;
  r.classifier_deviation_gap = 5.0;
  r.nme_accuracy = 0.77;
  r.timestamp = "2026-01-01T00:00:00Z";
  return r;
}

TEST(Report, JsonRoundTripWithNullsAndTrailingTimestamp) {
  const ForgettingReport r = sample_report();
  const std::string json = report_json(r);
  EXPECT_NE(json.find("null"), std::string::npos);
  EXPECT_NE(json.find("\"0123456789abcdef\""), std::string::npos);
  const auto ts = json.find("\"timestamp\"");
  ASSERT_NE(ts, std::string::npos);
  EXPECT_EQ(json.find('"', json.find('\n', ts) + 1), std::string::npos);
  const ForgettingReport back = parse_report_json(json);
  EXPECT_EQ(report_json(back), json);
  EXPECT_TRUE(std::isnan(back.separability(1, 0)));
  EXPECT_EQ(back.nme_accuracy, r.nme_accuracy);
}

TEST(Report, CsvRows) {
  const std::string csv = report_csv(sample_report());
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "metric,phase,time,value");
  EXPECT_NE(csv.find("separability,1,2,"), std::string::npos);
  EXPECT_NE(csv.find("final_acc,,,"), std::string::npos);
  EXPECT_NE(csv.find("config_hash"), std::string::npos);
}

TEST(Report, MalformedJsonRejected) {
  EXPECT_THROW(parse_report_json("{not json"), DataError);
  EXPECT_THROW(parse_report_json("{}"), DataError);
}

}  // namespace
}  // namespace c4il
