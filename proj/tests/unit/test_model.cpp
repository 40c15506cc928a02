#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "c4il/model/checkpoint.hpp"
#include "c4il/model/encoder.hpp"
#include "c4il/model/heads.hpp"
#include "c4il/model/snapshot.hpp"
#include "c4il/numerics/gradcheck.hpp"
#include "c4il/numerics/ops.hpp"
#include "c4il/numerics/sgd.hpp"

namespace c4il {
namespace {

Matrix random_matrix(Rng& rng, int rows, int cols) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = 2.0 * uniform01(rng) - 1.0;
  return m;
}

TEST(Encoder, ZeroParametersGiveZeroRepresentations) {
  const std::vector<int> dims{3, 4, 2};
  std::vector<Matrix> params{Matrix::Zero(3, 4), Matrix::Zero(1, 4), Matrix::Zero(4, 2), Matrix::Zero(1, 2)};
  const EncoderModel enc(dims, params, Activation::relu);
  Rng rng = make_rng(1);
  EXPECT_EQ(enc.encode(random_matrix(rng, 5, 3)), Matrix::Zero(5, 2));
}

TEST(Encoder, IdentityLayerPassesInputThrough) {
  const EncoderModel enc({4, 4}, {Matrix::Identity(4, 4), Matrix::Zero(1, 4)}, Activation::relu);
  Rng rng = make_rng(2);
  const Matrix x = random_matrix(rng, 3, 4);
  EXPECT_EQ(enc.encode(x), x);
}

TEST(Encoder, TapedForwardMatchesPlainForwardBitwise) {
  Rng rng = make_rng(3);
  const EncoderModel enc({5, 7, 6, 3}, rng);
  const Matrix x = random_matrix(rng, 4, 5);
  Tape tape;
  const auto taped = enc.encode(tape, tape.constant(x));
  EXPECT_EQ(tape.value(taped.output), enc.encode(x));
  EXPECT_EQ(enc.encode(x), enc.encode(x));
}

TEST(Encoder, ParameterGradientMatchesFiniteDifferences) {
  Rng rng = make_rng(4);
  const EncoderModel enc({3, 4, 2}, rng);
  const Matrix x = random_matrix(rng, 3, 3);
  Tape tape;
  const auto taped = enc.encode(tape, tape.constant(x));
  tape.backward(sum(tape, taped.output));
  for (std::size_t p = 0; p < taped.params.size(); ++p) {
    const Matrix numeric = finite_diff_grad(
        [&](const Matrix& value) {
          EncoderModel copy = enc;
          copy.parameters()[p] = value;
          return copy.encode(x).sum();
        },
        enc.parameters()[p]);
    EXPECT_LT(relative_error(tape.grad(taped.params[p]), numeric), 1e-4) << "parameter " << p;
  }
}

TEST(Encoder, FrozenEncodeRecordsNoParameters) {
  Rng rng = make_rng(5);
  const EncoderModel enc({3, 4, 2}, rng);
  Tape tape;
  const auto taped = enc.encode(tape, tape.constant(Matrix::Ones(2, 3)), false);
  EXPECT_TRUE(taped.params.empty());
}

TEST(Encoder, RejectsBadShapes) {
  Rng rng = make_rng(6);
  EXPECT_THROW(EncoderModel({3}, rng), ShapeError);
  EXPECT_THROW(EncoderModel({3, 0, 2}, rng), ShapeError);
  const EncoderModel enc({3, 2}, rng);
  EXPECT_THROW(enc.encode(Matrix::Zero(2, 4)), ShapeError);
  EXPECT_THROW(EncoderModel({3, 2}, {Matrix::Zero(2, 2), Matrix::Zero(1, 2)}, Activation::relu), ShapeError);
}

TEST(Heads, ZeroWeightsGiveUniformDistribution) {
  ClassifierHeads heads(3);
  const std::vector<int> classes{4, 7, 9};
  heads.extend(classes, Matrix::Zero(3, 3));
  Rng rng = make_rng(7);
  const Matrix p = heads.classify(random_matrix(rng, 2, 3), HeadScope::all_seen);
  for (Eigen::Index i = 0; i < p.size(); ++i) EXPECT_NEAR(p.data()[i], 1.0 / 3.0, 1e-15);
}

TEST(Heads, TwoHeadsAllSeenIsRowStochastic) {
  ClassifierHeads heads(4);
  Rng rng = make_rng(8);
  heads.extend(std::vector<int>{0, 1}, rng);
  heads.extend(std::vector<int>{2, 3}, rng);
  const Matrix p = heads.classify(random_matrix(rng, 5, 4), HeadScope::all_seen);
  ASSERT_EQ(p.cols(), 4);
  for (Eigen::Index i = 0; i < p.rows(); ++i) EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-12);
  EXPECT_EQ(heads.classify(random_matrix(rng, 5, 4), HeadScope::current_phase).cols(), 2);
}

TEST(Heads, HandSetTwoClassSoftmax) {
  ClassifierHeads heads(2);
  heads.extend(std::vector<int>{0, 1}, Matrix::Identity(2, 2));
  Matrix r(1, 2);
  r << 2.0, 0.0;
  const Matrix p = heads.classify(r, HeadScope::all_seen);
  const double e2 = std::exp(2.0);
  EXPECT_NEAR(p(0, 0), e2 / (e2 + 1.0), 1e-15);
  EXPECT_NEAR(p(0, 1), 1.0 / (e2 + 1.0), 1e-15);
  EXPECT_NEAR(p(0, 0), 0.8808, 1e-4);
  EXPECT_NEAR(p(0, 1), 0.1192, 1e-4);
}

TEST(Heads, ExtendAddsOneHeadAndKeepsOldOnes) {
  ClassifierHeads heads(6);
  Rng rng = make_rng(9);
  std::vector<int> ten(10);
  for (int i = 0; i < 10; ++i) ten[static_cast<std::size_t>(i)] = i;
  heads.extend(ten, rng);
  EXPECT_EQ(heads.head_count(), 1u);
  EXPECT_EQ(heads.head(0).cols(), 10);
  const Matrix before = heads.head(0);
  heads.extend(std::vector<int>{10, 11}, rng);
  EXPECT_EQ(heads.head(0), before);
  EXPECT_EQ(heads.class_count(), 12);
  EXPECT_EQ(heads.column_of(11), 11);
  EXPECT_THROW(heads.extend(std::vector<int>{3}, rng), LabelError);
  EXPECT_THROW(heads.column_of(40), LabelError);
}

TEST(Heads, SeededInitIsReproducible) {
  ClassifierHeads a(5), b(5);
  Rng ra = make_rng(42), rb = make_rng(42);
  a.extend(std::vector<int>{0, 1, 2}, ra);
  b.extend(std::vector<int>{0, 1, 2}, rb);
  EXPECT_EQ(a.head(0), b.head(0));
  const double bound = 1.0 / std::sqrt(5.0);
  EXPECT_LE(a.head(0).cwiseAbs().maxCoeff(), bound);
}

TEST(Heads, PredictReturnsGlobalClassIds) {
  ClassifierHeads heads(2);
  heads.extend(std::vector<int>{5, 3}, Matrix::Identity(2, 2));
  Matrix r(2, 2);
  r << 1.0, 0.0, 0.0, 1.0;
  EXPECT_EQ(heads.predict(r), (std::vector<int>{5, 3}));
}

TEST(Heads, OldHeadsRange) {
  ClassifierHeads heads(3);
  Rng rng = make_rng(10);
  heads.extend(std::vector<int>{0, 1}, rng);
  heads.extend(std::vector<int>{2, 3}, rng);
  heads.extend(std::vector<int>{4, 5}, rng);
  const HeadRange old = heads.old_heads();
  EXPECT_EQ(old.first, 0u);
  EXPECT_EQ(old.count, 2u);
  EXPECT_EQ(heads.class_count(old), 4);
}

TEST(Snapshot, FrozenAcrossTraining) {
  Rng rng = make_rng(11);
  EncoderModel enc({4, 6, 3}, rng);
  ClassifierHeads heads(3);
  heads.extend(std::vector<int>{0, 1}, rng);
  const Matrix x = random_matrix(rng, 5, 4);
  const ModelSnapshot snap = snapshot(enc, heads);
  EXPECT_EQ(snap.encode(x), enc.encode(x));
  const Matrix before = snap.encode(x);
  std::vector<Matrix> velocity;
  for (int step = 0; step < 100; ++step) {
    Tape tape;
    const auto taped = enc.encode(tape, tape.constant(x));
    tape.backward(sum(tape, taped.output));
    std::vector<Matrix> grads;
    for (Var v : taped.params) grads.push_back(tape.grad(v));
    sgd_step(enc.parameters(), grads, velocity, SgdOptions{0.01, 0.9, 0.0});
  }
  EXPECT_NE(enc.encode(x), before);
  EXPECT_EQ(snap.encode(x), before);
}

TEST(Snapshot, NormalizedRepresentationsHaveUnitNorm) {
  Rng rng = make_rng(12);
  const EncoderModel enc({4, 8, 3}, rng);
  const ModelSnapshot snap = snapshot(enc, ClassifierHeads(3));
  const Matrix g = l2_normalized_rows(snap.encode(random_matrix(rng, 50, 4)));
  for (Eigen::Index i = 0; i < g.rows(); ++i) EXPECT_NEAR(g.row(i).norm(), 1.0, 1e-12);
}

TEST(Checkpoint, RoundTripIsBitIdentical) {
  Rng rng = make_rng(13);
  Checkpoint ckpt{EncoderModel({4, 5, 3}, rng), ClassifierHeads(3), 2, 0xdeadbeefULL, ""};
  ckpt.heads.extend(std::vector<int>{0, 1}, rng);
  ckpt.heads.extend(std::vector<int>{2, 3, 4}, rng);
  std::ostringstream rng_state;
  rng_state << rng;
  ckpt.rng_state = rng_state.str();
  std::stringstream buffer;
  save_checkpoint(buffer, ckpt);
  const Checkpoint loaded = load_checkpoint(buffer);
  EXPECT_TRUE(loaded == ckpt);
  Rng resumed;
  std::istringstream(loaded.rng_state) >> resumed;
  EXPECT_EQ(resumed(), rng());
}

TEST(Checkpoint, CorruptInputIsRejected) {
  std::stringstream bad("NOTACKPT");
  EXPECT_ANY_THROW(load_checkpoint(bad));
  Rng rng = make_rng(14);
  const Checkpoint ckpt{EncoderModel({2, 2}, rng), ClassifierHeads(2), 1, 1, "x"};
  std::stringstream buffer;
  save_checkpoint(buffer, ckpt);
  const std::string bytes = buffer.str();
  std::stringstream truncated(bytes.substr(0, bytes.size() / 2));
  EXPECT_ANY_THROW(load_checkpoint(truncated));
}

}  // namespace
}  // namespace c4il
