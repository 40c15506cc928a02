#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "c4il/numerics/gradcheck.hpp"
#include "c4il/numerics/ops.hpp"
#include "c4il/numerics/rng.hpp"
#include "c4il/numerics/sgd.hpp"
#include "c4il/numerics/tape.hpp"

namespace c4il {
namespace {

Matrix random_matrix(Rng& rng, int rows, int cols, double lo = -1.0, double hi = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = lo + (hi - lo) * uniform01(rng);
  return m;
}

// Scalar probe: <f(x), w> for a fixed random weight matrix w.
template <typename Op>
double probe_value(Op op, const Matrix& x, const Matrix& w) {
  Tape tape;
  const Var out = op(tape, tape.leaf(x));
  return tape.value(out).cwiseProduct(w).sum();
}

template <typename Op>
double check_op(Op op, const Matrix& x, Rng& rng) {
  Tape probe_tape;
  const Matrix shape = probe_tape.value(op(probe_tape, probe_tape.leaf(x)));
  const Matrix w = random_matrix(rng, static_cast<int>(shape.rows()), static_cast<int>(shape.cols()));
  Tape tape;
  const Var in = tape.leaf(x);
  const Var out = op(tape, in);
  const Var loss = sum(tape, tape.record(tape.value(out).cwiseProduct(w), {out},
                                         [out, w](Tape& t, const Matrix& g) { t.accumulate(out, w * g(0, 0)); }));
  tape.backward(loss);
  const Matrix numeric = finite_diff_grad([&](const Matrix& p) { return probe_value(op, p, w); }, x);
  return relative_error(tape.grad(in), numeric);
}

TEST(Matmul, ScalarProduct) {
  Tape tape;
  const Var c = matmul(tape, tape.leaf(Matrix::Constant(1, 1, 2.0)), tape.leaf(Matrix::Constant(1, 1, 3.0)));
  EXPECT_EQ(tape.value(c)(0, 0), 6.0);
}

TEST(Matmul, IdentityLeavesMatrixUnchanged) {
  Rng rng = make_rng(1);
  const Matrix m = random_matrix(rng, 3, 5);
  Tape tape;
  const Var out = matmul(tape, tape.leaf(Matrix::Identity(3, 3)), tape.leaf(m));
  EXPECT_EQ(tape.value(out), m);
}

TEST(Matmul, GradientOfSumIsOnesTimesBTransposed) {
  Rng rng = make_rng(2);
  const Matrix a = random_matrix(rng, 4, 3);
  const Matrix b = random_matrix(rng, 3, 2);
  Tape tape;
  const Var va = tape.leaf(a);
  tape.backward(sum(tape, matmul(tape, va, tape.leaf(b))));
  const Matrix expected = Matrix::Ones(4, 2) * b.transpose();
  EXPECT_LT((tape.grad(va) - expected).norm(), 1e-12);
  const Matrix numeric = finite_diff_grad([&](const Matrix& p) { return (p * b).sum(); }, a);
  EXPECT_LT(relative_error(tape.grad(va), numeric), 1e-8);
}

TEST(Matmul, ShapeMismatchThrows) {
  Tape tape;
  EXPECT_THROW(matmul(tape, tape.leaf(Matrix::Zero(2, 3)), tape.leaf(Matrix::Zero(2, 3))), ShapeError);
}

TEST(L2Normalize, ThreeFourFive) {
  Tape tape;
  Matrix v(1, 2);
  v << 3.0, 4.0;
  const Var g = l2_normalize(tape, tape.leaf(v));
  EXPECT_NEAR(tape.value(g)(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(tape.value(g)(0, 1), 0.8, 1e-15);
}

TEST(L2Normalize, UnitVectorIsFixedPoint) {
  Matrix v(1, 3);
  v << 0.0, 1.0, 0.0;
  Tape tape;
  EXPECT_EQ(tape.value(l2_normalize(tape, tape.leaf(v))), v);
}

TEST(L2Normalize, ZeroRowThrows) {
  Tape tape;
  EXPECT_THROW(l2_normalize(tape, tape.leaf(Matrix::Zero(2, 4))), DegenerateVectorError);
}

TEST(L2Normalize, GradientMatchesFiniteDifferences) {
  Rng rng = make_rng(3);
  const Matrix v = random_matrix(rng, 1, 8);
  EXPECT_LT(check_op([](Tape& t, Var x) { return l2_normalize(t, x); }, v, rng), 1e-4);
}

TEST(Softmax, ZeroLogitsGiveUniform) {
  Tape tape;
  const Var p = softmax(tape, tape.leaf(Matrix::Zero(1, 3)));
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(tape.value(p)(0, j), 1.0 / 3.0, 1e-15);
}

TEST(Softmax, LargeLogitDoesNotOverflow) {
  Matrix z(1, 2);
  z << 1000.0, 0.0;
  Tape tape;
  const Matrix& p = tape.value(softmax(tape, tape.leaf(z)));
  EXPECT_TRUE(p.allFinite());
  EXPECT_NEAR(p(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(p(0, 1), 0.0, 1e-12);
}

TEST(Softmax, JacobianMatchesFiniteDifferences) {
  Rng rng = make_rng(4);
  const Matrix z = random_matrix(rng, 1, 5, -3.0, 3.0);
  EXPECT_LT(check_op([](Tape& t, Var x) { return softmax(t, x); }, z, rng), 1e-4);
}

TEST(Relu, GradientAwayFromKink) {
  Rng rng = make_rng(5);
  Matrix x = random_matrix(rng, 3, 4);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(x.data()[i]) < 0.05) x.data()[i] = 0.5;
  }
  EXPECT_LT(check_op([](Tape& t, Var v) { return relu(t, v); }, x, rng), 1e-6);
}

TEST(CrossEntropy, PerfectPredictionIsZero) {
  Matrix p(1, 3);
  p << 1.0, 0.0, 0.0;
  const std::vector<int> target{0};
  Tape tape;
  EXPECT_NEAR(tape.scalar(cross_entropy(tape, tape.leaf(p), target)), 0.0, 1e-12);
}

TEST(CrossEntropy, UniformOverFourIsLogFour) {
  const Matrix p = Matrix::Constant(1, 4, 0.25);
  for (int target = 0; target < 4; ++target) {
    const std::vector<int> t{target};
    Tape tape;
    EXPECT_NEAR(tape.scalar(cross_entropy(tape, tape.leaf(p), t)), std::log(4.0), 1e-12);
  }
  EXPECT_NEAR(std::log(4.0), 1.3863, 1e-4);
}

TEST(CrossEntropy, GradientMatchesFiniteDifferences) {
  Rng rng = make_rng(6);
  Matrix p = random_matrix(rng, 3, 4, 0.1, 1.0);
  const std::vector<int> targets{0, 2, 3};
  Tape tape;
  const Var vp = tape.leaf(p);
  tape.backward(cross_entropy(tape, vp, targets));
  const Matrix numeric = finite_diff_grad(
      [&](const Matrix& q) {
        double s = 0.0;
        for (int i = 0; i < 3; ++i) s -= std::log(q(i, targets[static_cast<std::size_t>(i)]));
        return s;
      },
      p);
  EXPECT_LT(relative_error(tape.grad(vp), numeric), 1e-4);
}

TEST(SoftmaxCrossEntropy, AgreesWithComposedOps) {
  Rng rng = make_rng(7);
  const Matrix z = random_matrix(rng, 5, 4, -2.0, 2.0);
  const std::vector<int> targets{0, 1, 2, 3, 1};
  Tape fused;
  const Var vz = fused.leaf(z);
  const Var loss = softmax_cross_entropy(fused, vz, targets);
  fused.backward(loss);
  Tape composed;
  const Var cz = composed.leaf(z);
  const Var closs = cross_entropy(composed, softmax(composed, cz), targets);
  composed.backward(closs);
  EXPECT_NEAR(fused.scalar(loss), composed.scalar(closs), 1e-12);
  EXPECT_LT((fused.grad(vz) - composed.grad(cz)).norm(), 1e-12);
}

TEST(SoftmaxCrossEntropy, GradientSurvivesSaturation) {
  Matrix z(1, 2);
  z << 0.0, 80.0;
  const std::vector<int> target{0};
  Tape tape;
  const Var vz = tape.leaf(z);
  const Var loss = softmax_cross_entropy(tape, vz, target);
  tape.backward(loss);
  EXPECT_NEAR(tape.scalar(loss), 80.0, 1e-9);
  EXPECT_NEAR(tape.grad(vz)(0, 0), -1.0, 1e-12);
  EXPECT_NEAR(tape.grad(vz)(0, 1), 1.0, 1e-12);
}

TEST(Mse, HandValues) {
  Matrix a(1, 2), b(1, 2);
  a << 1.0, 0.0;
  b << 0.0, 1.0;
  Tape tape;
  EXPECT_EQ(tape.scalar(mse(tape, tape.leaf(a), tape.leaf(a))), 0.0);
  EXPECT_NEAR(tape.scalar(mse(tape, tape.leaf(a), tape.leaf(b))), 1.0, 1e-15);
}

TEST(Mse, GradientIsTwoDiffOverN) {
  Rng rng = make_rng(8);
  const Matrix a = random_matrix(rng, 2, 3);
  const Matrix b = random_matrix(rng, 2, 3);
  Tape tape;
  const Var va = tape.leaf(a);
  tape.backward(mse(tape, va, tape.leaf(b)));
  const Matrix expected = 2.0 * (a - b) / 6.0;
  EXPECT_LT((tape.grad(va) - expected).norm(), 1e-14);
  const Matrix numeric = finite_diff_grad([&](const Matrix& p) { return (p - b).squaredNorm() / 6.0; }, a);
  EXPECT_LT(relative_error(tape.grad(va), numeric), 1e-6);
}

TEST(FiniteDiff, SumGivesOnes) {
  Rng rng = make_rng(9);
  const Matrix x = random_matrix(rng, 2, 3);
  const Matrix g = finite_diff_grad([](const Matrix& p) { return p.sum(); }, x);
  EXPECT_LT((g - Matrix::Ones(2, 3)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(FiniteDiff, HalfSquaredNormGivesX) {
  Rng rng = make_rng(10);
  const Matrix x = random_matrix(rng, 3, 2);
  const Matrix g = finite_diff_grad([](const Matrix& p) { return 0.5 * p.squaredNorm(); }, x);
  EXPECT_LT((g - x).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(FiniteDiff, NonFiniteFunctionThrows) {
  const Matrix x = Matrix::Zero(1, 1);
  EXPECT_THROW(finite_diff_grad([](const Matrix& p) { return std::log(p(0, 0)); }, x), OracleError);
}

TEST(Sgd, PlainStep) {
  std::vector<Matrix> params{Matrix::Constant(1, 1, 1.0)};
  const std::vector<Matrix> grads{Matrix::Constant(1, 1, 1.0)};
  std::vector<Matrix> velocity;
  sgd_step(params, grads, velocity, SgdOptions{1.0, 0.0, 0.0});
  EXPECT_EQ(params[0](0, 0), 0.0);
}

TEST(Sgd, ZeroGradientLeavesParams) {
  Rng rng = make_rng(11);
  const Matrix p0 = random_matrix(rng, 2, 2);
  std::vector<Matrix> params{p0};
  const std::vector<Matrix> grads{Matrix::Zero(2, 2)};
  std::vector<Matrix> velocity;
  sgd_step(params, grads, velocity, SgdOptions{0.1, 0.9, 0.0});
  EXPECT_EQ(params[0], p0);
}

TEST(Sgd, TwoMomentumStepsOnQuadratic) {
  // Independent recurrence: v1 = g0, x1 = x0 - lr v1; v2 = mu v1 + g1, x2 = x1 - lr v2.
  const double lr = 0.1, mu = 0.9, x0 = 1.0;
  const double v1 = x0;
  const double x1 = x0 - lr * v1;
  const double v2 = mu * v1 + x1;
  const double x2 = x1 - lr * v2;

  std::vector<Matrix> params{Matrix::Constant(1, 1, x0)};
  std::vector<Matrix> velocity;
  for (int step = 0; step < 2; ++step) {
    const std::vector<Matrix> grads{params[0]};
    sgd_step(params, grads, velocity, SgdOptions{lr, mu, 0.0});
  }
  EXPECT_NEAR(params[0](0, 0), x2, 1e-15);
  EXPECT_NEAR(params[0](0, 0), 0.9 - 0.1 * (0.9 * 1.0 + 0.9), 1e-15);
}

TEST(Sgd, StepDecay) {
  EXPECT_DOUBLE_EQ(step_decay(1.0, 0, 0, 0.1), 1.0);
  EXPECT_DOUBLE_EQ(step_decay(1.0, 9, 10, 0.1), 1.0);
  EXPECT_NEAR(step_decay(1.0, 10, 10, 0.1), 0.1, 1e-15);
  EXPECT_NEAR(step_decay(1.0, 25, 10, 0.5), 0.25, 1e-15);
}

TEST(Rng, DeriveSeedIsStableAndTagSensitive) {
  EXPECT_EQ(derive_seed(1, {2, 3}), derive_seed(1, {2, 3}));
  EXPECT_NE(derive_seed(1, {2, 3}), derive_seed(1, {3, 2}));
  EXPECT_NE(derive_seed(1, {}), derive_seed(2, {}));
  Rng a = make_rng(5, {7});
  Rng b = make_rng(5, {7});
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a(), b());
}

TEST(Rng, ShuffleIsPermutation) {
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[static_cast<std::size_t>(i)] = i;
  Rng rng = make_rng(3);
  seeded_shuffle(v, rng);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[static_cast<std::size_t>(i)], i);
}

TEST(Tape, GradientAccumulatesOverSharedInputs) {
  Tape tape;
  const Var x = tape.leaf(Matrix::Constant(1, 1, 3.0));
  const Var y = add(tape, x, x);
  tape.backward(sum(tape, y));
  EXPECT_EQ(tape.grad(x)(0, 0), 2.0);
}

TEST(Tape, NonScalarRootThrows) {
  Tape tape;
  const Var x = tape.leaf(Matrix::Ones(2, 2));
  EXPECT_ANY_THROW(tape.backward(x));
}

}  // namespace
}  // namespace c4il
