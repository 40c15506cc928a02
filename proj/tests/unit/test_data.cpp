#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "c4il/data/augment.hpp"
#include "c4il/data/batch.hpp"
#include "c4il/data/io.hpp"
#include "c4il/data/stream.hpp"
#include "c4il/data/synthetic.hpp"
#include "c4il/eval/probe.hpp"

namespace c4il {
namespace {

Dataset labeled(int classes, int per_class, int dim = 3) {
  Dataset out;
  std::int64_t id = 0;
  for (int c = 0; c < classes; ++c) {
    for (int i = 0; i < per_class; ++i) {
      Sample s;
      s.id = id++;
      s.label = c;
      s.features = Vector::Constant(dim, c + 0.01 * i);
      out.push_back(s);
    }
  }
  return out;
}

Sample raster_sample(Rng& rng, int h, int w, int c) {
  Sample s;
  s.raster = RasterShape{h, w, c};
  s.features.resize(h * w * c);
  for (Eigen::Index i = 0; i < s.features.size(); ++i) s.features(i) = uniform01(rng);
  return s;
}

void put_be32(std::string& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xff));
}

TEST(SplitStream, HundredClassesIntoTenPhases) {
  const Dataset data = labeled(100, 5);
  const CILStream stream = split_stream(data, 10, 7);
  ASSERT_EQ(stream.phase_count(), 10u);
  std::set<int> all;
  for (const PhaseData& p : stream.phases) {
    EXPECT_EQ(p.classes.size(), 10u);
    EXPECT_EQ(p.samples.size(), data.size() / 10);
    for (int c : p.classes) EXPECT_TRUE(all.insert(c).second);
    for (const Sample& s : p.samples) EXPECT_TRUE(std::binary_search(p.classes.begin(), p.classes.end(), s.label));
  }
  EXPECT_EQ(all.size(), 100u);
}

TEST(SplitStream, SinglePhaseRejected) {
  EXPECT_THROW(split_stream(labeled(4, 2), 1, 0), DataError);
  EXPECT_THROW(split_stream(labeled(5, 2), 2, 0), DataError);
}

TEST(SplitStream, SeedControlsAssignment) {
  const Dataset data = labeled(20, 3);
  const CILStream a = split_stream(data, 5, 11);
  const CILStream b = split_stream(data, 5, 11);
  const CILStream c = split_stream(data, 5, 12);
  bool differs = false;
  for (std::size_t t = 0; t < 5; ++t) {
    EXPECT_EQ(a.phases[t].classes, b.phases[t].classes);
    EXPECT_EQ(c.phases[t].classes.size(), a.phases[t].classes.size());
    differs = differs || a.phases[t].classes != c.phases[t].classes;
  }
  EXPECT_TRUE(differs);
}

TEST(SplitStream, PartitionLikeFollowsPhaseOwnership) {
  const Dataset train = labeled(6, 4);
  const CILStream stream = split_stream(train, 3, 5);
  const Dataset test = labeled(6, 2);
  const std::vector<Dataset> pools = partition_like(stream, test);
  ASSERT_EQ(pools.size(), 3u);
  for (std::size_t t = 0; t < 3; ++t) {
    EXPECT_EQ(pools[t].size(), 4u);
    for (const Sample& s : pools[t]) EXPECT_EQ(stream.phase_of(s.label), t);
  }
}

TEST(JointStream, OnePhaseWithEveryClass) {
  const CILStream joint = joint_stream(labeled(4, 3), 1);
  ASSERT_EQ(joint.phase_count(), 1u);
  EXPECT_EQ(joint.phases[0].classes, (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(joint.phases[0].samples.size(), 12u);
}

TEST(Augment, IdentityPolicyReturnsInput) {
  Rng rng = make_rng(1);
  const AugmentationPolicy vec = AugmentationPolicy::identity(AugmentMode::vector);
  const Sample v = labeled(1, 1, 6).front();
  EXPECT_EQ(augment(v, vec, rng).features, v.features);
  const AugmentationPolicy ras = AugmentationPolicy::identity(AugmentMode::raster);
  const Sample r = raster_sample(rng, 5, 4, 3);
  EXPECT_EQ(augment(r, ras, rng).features, r.features);
}

TEST(Augment, LabelsAndIdsPreserved) {
  Rng rng = make_rng(2);
  const Dataset data = labeled(3, 5, 4);
  const AugmentationPolicy policy = AugmentationPolicy::for_vectors(data, 0.3, 0.2);
  for (int i = 0; i < 1000; ++i) {
    const Sample& s = data[static_cast<std::size_t>(i) % data.size()];
    const Sample out = augment(s, policy, rng);
    EXPECT_EQ(out.label, s.label);
    EXPECT_EQ(out.id, s.id);
    EXPECT_EQ(out.features.size(), s.features.size());
  }
}

TEST(Augment, RasterStaysInUnitRange) {
  Rng rng = make_rng(3);
  AugmentationPolicy policy;
  policy.mode = AugmentMode::raster;
  for (int i = 0; i < 1000; ++i) {
    const Sample s = raster_sample(rng, 6, 6, 3);
    const Sample out = augment(s, policy, rng);
    ASSERT_EQ(out.features.size(), s.features.size());
    EXPECT_GE(out.features.minCoeff(), 0.0);
    EXPECT_LE(out.features.maxCoeff(), 1.0);
  }
}

TEST(Augment, InvalidPolicyRejected) {
  AugmentationPolicy policy;
  policy.raster.flip_prob = 1.5;
  EXPECT_THROW(policy.validate(), DataError);
  policy = AugmentationPolicy{};
  policy.raster.crop_scale_min = 0.0;
  EXPECT_THROW(policy.validate(), DataError);
}

TEST(Batch, NoMemoryDrawsCurrentPhaseOnly) {
  const Dataset phase = labeled(2, 20);
  AuditedPool pool(phase, {});
  Rng rng = make_rng(4);
  const TrainingBatch batch =
      build_training_batch(pool, 16, AugmentationPolicy::identity(AugmentMode::vector), rng);
  EXPECT_EQ(batch.size(), 16u);
  EXPECT_EQ(pool.memory_size(), 0u);
  for (std::int64_t id : batch.ids) EXPECT_LT(id, 40);
}

TEST(Batch, TwinsShareLabelsAndOrder) {
  const Dataset phase = labeled(3, 10, 4);
  AuditedPool pool(phase, {});
  Rng rng = make_rng(5);
  const TrainingBatch batch =
      build_training_batch(pool, 12, AugmentationPolicy::for_vectors(phase, 0.5, 0.0), rng);
  ASSERT_EQ(batch.original.rows(), batch.augmented.rows());
  std::map<std::int64_t, const Sample*> by_id;
  for (const Sample& s : phase) by_id[s.id] = &s;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Sample& s = *by_id.at(batch.ids[i]);
    EXPECT_EQ(batch.labels[i], s.label);
    EXPECT_EQ(Vector(batch.original.row(static_cast<Eigen::Index>(i)).transpose()), s.features);
  }
  EXPECT_NE(batch.original, batch.augmented);
}

TEST(Batch, OldClassFractionMatchesMemoryShare) {
  Dataset phase = labeled(2, 150);
  Dataset memory;
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < 200; ++i) {
      Sample s;
      s.id = 10000 + c * 1000 + i;
      s.label = 10 + c;
      s.features = Vector::Zero(3);
      memory.push_back(s);
    }
  }
  AuditedPool pool(phase, memory);
  const double share = static_cast<double>(memory.size()) / static_cast<double>(pool.size());
  const std::size_t batch_size = 128;
  const int batches = 10000;
  Rng rng = make_rng(6);
  const AugmentationPolicy id = AugmentationPolicy::identity(AugmentMode::vector);
  double old_rows = 0.0;
  for (int b = 0; b < batches; ++b) {
    const TrainingBatch batch = build_training_batch(pool, batch_size, id, rng);
    for (int label : batch.labels) old_rows += label >= 10 ? 1.0 : 0.0;
  }
  const double n = static_cast<double>(batches) * static_cast<double>(batch_size);
  const double sigma = std::sqrt(n * share * (1.0 - share));
  EXPECT_LT(std::abs(old_rows - n * share), 3.0 * sigma);
}

TEST(Batch, AuditRecordsEveryRead) {
  const Dataset phase = labeled(2, 5);
  AuditedPool pool(phase, {});
  Rng rng = make_rng(7);
  build_training_batch(pool, 4, AugmentationPolicy::identity(AugmentMode::vector), rng);
  EXPECT_EQ(pool.read_count(), 4u);
  EXPECT_EQ(pool.touched().size(), 4u);
  EXPECT_THROW(build_training_batch(pool, 1, AugmentationPolicy::identity(AugmentMode::vector), rng), DataError);
}

TEST(Idx, FourImageFixtureRoundTrips) {
  // 4 images of 2x3 pixels; pixel value = 10 * image + position.
  std::string images, labels;
  put_be32(images, 0x00000803);
  put_be32(images, 4);
  put_be32(images, 2);
  put_be32(images, 3);
  for (int n = 0; n < 4; ++n) {
    for (int p = 0; p < 6; ++p) images.push_back(static_cast<char>(10 * n + p));
  }
  put_be32(labels, 0x00000801);
  put_be32(labels, 4);
  for (char l : {3, 1, 4, 1}) labels.push_back(l);

  std::istringstream img(images), lab(labels);
  const Dataset data = load_idx(img, lab);
  ASSERT_EQ(data.size(), 4u);
  const std::vector<int> expected_labels{3, 1, 4, 1};
  for (int n = 0; n < 4; ++n) {
    const Sample& s = data[static_cast<std::size_t>(n)];
    EXPECT_EQ(s.id, n);
    EXPECT_EQ(s.label, expected_labels[static_cast<std::size_t>(n)]);
    EXPECT_EQ(s.raster, (RasterShape{2, 3, 1}));
    for (int p = 0; p < 6; ++p) EXPECT_DOUBLE_EQ(s.features(p), (10.0 * n + p) / 255.0);
  }
}

TEST(Idx, CountMismatchAndTruncation) {
  std::string images, labels;
  put_be32(images, 0x00000803);
  put_be32(images, 2);
  put_be32(images, 1);
  put_be32(images, 1);
  images += std::string(2, '\x01');
  put_be32(labels, 0x00000801);
  put_be32(labels, 3);
  labels += std::string(3, '\x00');
  std::istringstream img(images), lab(labels);
  EXPECT_THROW(load_idx(img, lab), DataError);

  std::istringstream empty_img(""), empty_lab("");
  try {
    load_idx(empty_img, empty_lab);
    FAIL() << "empty input accepted";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("truncated"), std::string::npos);
  }
}

TEST(Csv, RoundTripIsExact) {
  const GaussianMixtureSpec spec{3, 4, 5, 4.0, 1.0, 9};
  const Dataset data = gen_gaussian_mixture(spec);
  std::stringstream buffer;
  write_csv(buffer, data);
  const Dataset back = read_csv(buffer);
  ASSERT_EQ(back.size(), data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(back[i].id, data[i].id);
    EXPECT_EQ(back[i].label, data[i].label);
    EXPECT_EQ(back[i].features, data[i].features);
  }
}

TEST(Csv, MalformedInputRejected) {
  std::istringstream no_header("1,2,3\n");
  EXPECT_THROW(read_csv(no_header), DataError);
  std::istringstream ragged("sample_id,label,f0,f1\n0,1,0.5\n");
  EXPECT_THROW(read_csv(ragged), DataError);
}

TEST(Synthetic, WellSeparatedPairIsLinearlySeparable) {
  const Dataset data = gen_gaussian_mixture(GaussianMixtureSpec{2, 2, 200, 10.0, 1.0, 3});
  const ProbeResult probe = linear_probe(stack_features(data), labels_of(data), ProbeOptions{});
  EXPECT_GE(probe.accuracy, 0.99);
}

TEST(Synthetic, SameSeedIsBitIdentical) {
  const GaussianMixtureSpec spec{5, 8, 20, 4.0, 1.0, 17};
  const Dataset a = gen_gaussian_mixture(spec);
  const Dataset b = gen_gaussian_mixture(spec);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].features, b[i].features);
}

TEST(Synthetic, CountsAndSeparation) {
  const GaussianMixtureSpec spec{10, 8, 37, 4.0, 0.5, 2};
  const Dataset data = gen_gaussian_mixture(spec);
  std::map<int, int> counts;
  for (const Sample& s : data) ++counts[s.label];
  ASSERT_EQ(counts.size(), 10u);
  for (const auto& [label, n] : counts) EXPECT_EQ(n, 37) << "class " << label;
  const Matrix means = gaussian_mixture_means(spec);
  for (int a = 0; a < 10; ++a) {
    for (int b = a + 1; b < 10; ++b) EXPECT_GE((means.row(a) - means.row(b)).norm(), 4.0 * 0.5);
  }
}

TEST(Synthetic, InfeasibleOrInvalidSpecsRejected) {
  EXPECT_THROW(gen_gaussian_mixture(GaussianMixtureSpec{1, 2, 5, 4.0, 1.0, 0}), DataError);
  EXPECT_THROW(gen_gaussian_mixture(GaussianMixtureSpec{3, 2, 5, 0.0, 1.0, 0}), DataError);
  EXPECT_THROW(gen_gaussian_mixture(GaussianMixtureSpec{3000, 1, 1, 4.0, 1.0, 0}), DataError);
}

}  // namespace
}  // namespace c4il
