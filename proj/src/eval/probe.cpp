#include "c4il/eval/probe.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "c4il/errors.hpp"
#include "c4il/numerics/rng.hpp"

namespace c4il {

SplitIndices stratified_split(std::span<const int> labels, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("stratified_split: train fraction must lie in (0, 1)");
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  SplitIndices out;
  for (auto& [c, rows] : by_class) {
    Rng rng = make_rng(seed, {0x53504c4954ULL, static_cast<std::uint64_t>(c)});
    seeded_shuffle(rows, rng);
    const std::size_t n = rows.size();
    auto k = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    k = std::max<std::size_t>(k, 1);
    if (n >= 2) k = std::min(k, n - 1);
    out.train.insert(out.train.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(k));
    out.test.insert(out.test.end(), rows.begin() + static_cast<std::ptrdiff_t>(k), rows.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

namespace {

double largest_eigenvalue(const Matrix& gram) {
  Vector v = Vector::Ones(gram.rows()) / std::sqrt(static_cast<double>(gram.rows()));
  double lambda = 0.0;
  for (int i = 0; i < 100; ++i) {
    Vector w = gram * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    const double next = v.dot(gram * v);
    if (std::abs(next - lambda) <= 1e-10 * std::max(1.0, next)) return next;
    lambda = next;
  }
  return lambda;
}

}  // namespace

ProbeResult linear_probe(const Matrix& train_reps, std::span<const int> train_labels, const Matrix& test_reps,
                         std::span<const int> test_labels, const ProbeOptions& options) {
  const auto n = train_reps.rows();
  const auto d = train_reps.cols();
  if (static_cast<std::size_t>(n) != train_labels.size()) throw ShapeError("linear_probe: train label count mismatch");
  if (static_cast<std::size_t>(test_reps.rows()) != test_labels.size()) {
    throw ShapeError("linear_probe: test label count mismatch");
  }
  if (test_reps.rows() > 0 && test_reps.cols() != d) throw ShapeError("linear_probe: train/test width mismatch");
  if (options.weight_decay < 0.0 || options.max_iterations < 0) throw ConfigError("linear_probe: bad options");
  require_finite(train_reps, "linear_probe");
  require_finite(test_reps, "linear_probe");

  ProbeResult result;
  result.classes.assign(train_labels.begin(), train_labels.end());
  std::sort(result.classes.begin(), result.classes.end());
  result.classes.erase(std::unique(result.classes.begin(), result.classes.end()), result.classes.end());
  if (result.classes.size() < 2) {
    throw DataError("linear_probe: a probe needs at least 2 classes, got " + std::to_string(result.classes.size()));
  }
  const auto k = static_cast<Eigen::Index>(result.classes.size());
  std::map<int, Eigen::Index> column;
  for (Eigen::Index j = 0; j < k; ++j) column[result.classes[static_cast<std::size_t>(j)]] = j;

  const RowVector mean = train_reps.colwise().mean();
  RowVector stddev = ((train_reps.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(n))
                         .sqrt()
                         .matrix();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (stddev(j) < kNormEpsilon) stddev(j) = 1.0;
  }
  const Matrix x = (train_reps.rowwise() - mean).array().rowwise() / stddev.array();

  Matrix targets = Matrix::Zero(n, k);
  for (Eigen::Index i = 0; i < n; ++i) targets(i, column.at(train_labels[static_cast<std::size_t>(i)])) = 1.0;

  // Softmax cross-entropy has Hessian bounded by 0.5 * X~'X~ / n with X~ = [X 1].
  Matrix augmented(n, d + 1);
  augmented << x, Matrix::Ones(n, 1);
  const Matrix gram = augmented.transpose() * augmented / static_cast<double>(n);
  const double curvature = 0.5 * largest_eigenvalue(gram) + options.weight_decay;
  const double step = 1.0 / std::max(curvature, kNormEpsilon);

  Matrix w = Matrix::Zero(d, k);
  RowVector b = RowVector::Zero(k);
  const double inv_n = 1.0 / static_cast<double>(n);
  auto evaluate = [&](Matrix& grad_w, RowVector& grad_b) {
    Matrix logits = x * w;
    logits.rowwise() += b;
    const Matrix probs = softmax_rows(logits);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      loss -= std::log(std::max((probs.row(i).array() * targets.row(i).array()).sum(), kProbEpsilon));
    }
    loss = loss * inv_n + 0.5 * options.weight_decay * w.squaredNorm();
    const Matrix residual = (probs - targets) * inv_n;
    grad_w = x.transpose() * residual + options.weight_decay * w;
    grad_b = residual.colwise().sum();
    return loss;
  };

  Matrix gw;
  RowVector gb;
  double loss = evaluate(gw, gb);
  double gnorm = std::sqrt(gw.squaredNorm() + gb.squaredNorm());
  int it = 0;
  while (it < options.max_iterations && gnorm > options.grad_tolerance) {
    w -= step * gw;
    b -= step * gb;
    loss = evaluate(gw, gb);
    gnorm = std::sqrt(gw.squaredNorm() + gb.squaredNorm());
    ++it;
  }

  result.final_loss = loss;
  result.grad_norm = gnorm;
  result.iterations = it;
  result.weights = w;
  result.bias = b;

  if (test_reps.rows() > 0) {
    const Matrix xt = (test_reps.rowwise() - mean).array().rowwise() / stddev.array();
    Matrix logits = xt * w;
    logits.rowwise() += b;
    const Eigen::VectorXi pred = argmax_rows(logits);
    std::size_t hits = 0;
    for (Eigen::Index i = 0; i < xt.rows(); ++i) {
      const int truth = test_labels[static_cast<std::size_t>(i)];
      hits += result.classes[static_cast<std::size_t>(pred(i))] == truth ? 1 : 0;
    }
    result.accuracy = static_cast<double>(hits) / static_cast<double>(xt.rows());
  }
  return result;
}

ProbeResult linear_probe(const Matrix& reps, std::span<const int> labels, const ProbeOptions& options) {
  if (static_cast<std::size_t>(reps.rows()) != labels.size()) throw ShapeError("linear_probe: label count mismatch");
  const SplitIndices split = stratified_split(labels, options.train_fraction, options.seed);
  auto gather = [&](const std::vector<std::size_t>& idx, Matrix& m, std::vector<int>& y) {
    m.resize(static_cast<Eigen::Index>(idx.size()), reps.cols());
    y.clear();
    for (std::size_t r = 0; r < idx.size(); ++r) {
      m.row(static_cast<Eigen::Index>(r)) = reps.row(static_cast<Eigen::Index>(idx[r]));
      y.push_back(labels[idx[r]]);
    }
  };
  Matrix train, test;
  std::vector<int> ytrain, ytest;
  gather(split.train, train, ytrain);
  gather(split.test, test, ytest);
  return linear_probe(train, ytrain, test, ytest, options);
}

}  // namespace c4il
