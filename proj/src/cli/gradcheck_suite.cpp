#include "c4il/cli/gradcheck_suite.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "c4il/core/losses.hpp"
#include "c4il/core/trainer.hpp"
#include "c4il/errors.hpp"
#include "c4il/numerics/gradcheck.hpp"
#include "c4il/numerics/ops.hpp"
#include "c4il/numerics/rng.hpp"

namespace c4il {

namespace {

Matrix uniform(Rng& rng, Eigen::Index rows, Eigen::Index cols, double lo = -1.0, double hi = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = lo + (hi - lo) * uniform01(rng);
  }
  return m;
}

std::vector<int> random_labels(Rng& rng, std::size_t n, int classes) {
  std::vector<int> out(n);
  for (int& y : out) y = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(classes)));
  return out;
}

// One differentiable input of a component: f(x) and its taped gradient.
struct Probe {
  Matrix x;
  std::function<double(const Matrix&)> value;
  std::function<Matrix(const Matrix&)> gradient;
};

// Builds `op` on a fresh tape with `x` as the only gradient leaf and returns
// the scalar and d/dx.
using TapedScalar = std::function<Var(Tape&, Var)>;

Probe taped_probe(Matrix x, TapedScalar op) {
  Probe p;
  p.x = std::move(x);
  p.value = [op](const Matrix& m) {
    Tape tape;
    return tape.scalar(op(tape, tape.leaf(m)));
  };
  p.gradient = [op](const Matrix& m) {
    Tape tape;
    const Var leaf = tape.leaf(m);
    tape.backward(op(tape, leaf));
    return tape.grad(leaf);
  };
  return p;
}

// Reduces a matrix-valued layer output to a scalar with a random target so
// every output entry carries a distinct, non-zero adjoint.
TapedScalar against_target(std::function<Var(Tape&, Var)> layer, Matrix target) {
  return [layer = std::move(layer), target = std::move(target)](Tape& tape, Var x) {
    return squared_distance(tape, layer(tape, x), tape.constant(target));
  };
}

Matrix away_from_zero(Matrix m, double margin) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    double& v = m.data()[i];
    if (std::abs(v) < margin) v = v < 0 ? v - margin : v + margin;
  }
  return m;
}

double min_abs_preactivation(const EncoderModel& enc, const Matrix& x) {
  const auto params = enc.parameters();
  Matrix h = x;
  double smallest = INFINITY;
  for (std::size_t l = 0; l + 1 < enc.layer_count(); ++l) {
    Matrix z = h * params[2 * l];
    z.rowwise() += params[2 * l + 1].row(0);
    smallest = std::min(smallest, z.cwiseAbs().minCoeff());
    h = z.cwiseMax(0.0);
  }
  return smallest;
}

std::vector<Matrix> random_encoder_params(Rng& rng, const std::vector<int>& dims) {
  std::vector<Matrix> params;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    params.push_back(uniform(rng, dims[l], dims[l + 1], -0.8, 0.8));
    params.push_back(uniform(rng, 1, dims[l + 1], -0.3, 0.3));
  }
  return params;
}

struct Sizes {
  Eigen::Index n, d, m, k;
};

using Generator = std::function<std::vector<Probe>(Rng&, const Sizes&)>;

std::vector<Probe> gen_matmul(Rng& rng, const Sizes& s) {
  const Matrix a = uniform(rng, s.n, s.d);
  const Matrix b = uniform(rng, s.d, s.m);
  const Matrix target = uniform(rng, s.n, s.m);
  return {
      taped_probe(a, against_target([b](Tape& t, Var x) { return matmul(t, x, t.constant(b)); }, target)),
      taped_probe(b, against_target([a](Tape& t, Var x) { return matmul(t, t.constant(a), x); }, target)),
  };
}

std::vector<Probe> gen_add_row(Rng& rng, const Sizes& s) {
  const Matrix x = uniform(rng, s.n, s.m);
  const Matrix bias = uniform(rng, 1, s.m);
  const Matrix target = uniform(rng, s.n, s.m);
  return {
      taped_probe(x, against_target([bias](Tape& t, Var v) { return add_row(t, v, t.constant(bias)); }, target)),
      taped_probe(bias, against_target([x](Tape& t, Var v) { return add_row(t, t.constant(x), v); }, target)),
  };
}

std::vector<Probe> gen_relu(Rng& rng, const Sizes& s) {
  const Matrix x = away_from_zero(uniform(rng, s.n, s.m), 0.05);
  return {taped_probe(x, against_target([](Tape& t, Var v) { return relu(t, v); }, uniform(rng, s.n, s.m)))};
}

std::vector<Probe> gen_l2_normalize(Rng& rng, const Sizes& s) {
  const Matrix x = uniform(rng, s.n, s.m, -2.0, 2.0);
  return {taped_probe(x, against_target([](Tape& t, Var v) { return l2_normalize(t, v); }, uniform(rng, s.n, s.m)))};
}

std::vector<Probe> gen_softmax(Rng& rng, const Sizes& s) {
  const Matrix x = uniform(rng, s.n, s.k, -3.0, 3.0);
  return {taped_probe(x, against_target([](Tape& t, Var v) { return softmax(t, v); }, uniform(rng, s.n, s.k, 0, 1)))};
}

std::vector<Probe> gen_encoder(Rng& rng, const Sizes& s) {
  const std::vector<int> dims{static_cast<int>(s.d), static_cast<int>(s.m), static_cast<int>(s.m),
                              static_cast<int>(s.m / 2 + 2)};
  Matrix x;
  std::vector<Matrix> params;
  do {
    x = uniform(rng, s.n, s.d, -2.0, 2.0);
    params = random_encoder_params(rng, dims);
  } while (min_abs_preactivation(EncoderModel(dims, params, Activation::relu), x) < 1e-3);
  const Matrix target = uniform(rng, s.n, dims.back());
  std::vector<Probe> out;
  out.push_back(taped_probe(x, against_target(
                                   [dims, params](Tape& t, Var v) {
                                     return EncoderModel(dims, params, Activation::relu).encode(t, v, false).output;
                                   },
                                   target)));
  for (std::size_t which = 0; which < params.size(); ++which) {
    auto run = [dims, params, x, target, which](const Matrix& value, bool with_grad) {
      std::vector<Matrix> p = params;
      p[which] = value;
      const EncoderModel enc(dims, p, Activation::relu);
      Tape t;
      const auto taped = enc.encode(t, t.constant(x), true);
      const Var loss = squared_distance(t, taped.output, t.constant(target));
      if (!with_grad) return std::pair{t.scalar(loss), Matrix()};
      t.backward(loss);
      return std::pair{t.scalar(loss), t.grad(taped.params[which])};
    };
    Probe probe;
    probe.x = params[which];
    probe.value = [run](const Matrix& m) { return run(m, false).first; };
    probe.gradient = [run](const Matrix& m) { return run(m, true).second; };
    out.push_back(std::move(probe));
  }
  return out;
}

std::vector<Probe> gen_heads(Rng& rng, const Sizes& s) {
  const Matrix reps = uniform(rng, s.n, s.m);
  ClassifierHeads heads(static_cast<int>(s.m));
  std::vector<int> first(static_cast<std::size_t>(s.k)), second(static_cast<std::size_t>(s.k));
  for (Eigen::Index j = 0; j < s.k; ++j) {
    first[static_cast<std::size_t>(j)] = static_cast<int>(j);
    second[static_cast<std::size_t>(j)] = static_cast<int>(s.k + j);
  }
  heads.extend(first, uniform(rng, s.m, s.k));
  heads.extend(second, uniform(rng, s.m, s.k));
  const Matrix target = uniform(rng, s.n, 2 * s.k);
  std::vector<Probe> out;
  out.push_back(taped_probe(reps, against_target(
                                      [heads](Tape& t, Var v) {
                                        return heads.logits(t, v, heads.scope(HeadScope::all_seen), false).logits;
                                      },
                                      target)));
  for (std::size_t h = 0; h < 2; ++h) {
    auto run = [heads, reps, target, h](const Matrix& value, bool with_grad) {
      ClassifierHeads changed = heads;
      changed.parameters()[h] = value;
      Tape t;
      const auto taped = changed.logits(t, t.constant(reps), changed.scope(HeadScope::all_seen), true);
      const Var loss = squared_distance(t, taped.logits, t.constant(target));
      if (!with_grad) return std::pair{t.scalar(loss), Matrix()};
      t.backward(loss);
      return std::pair{t.scalar(loss), t.grad(taped.params[h])};
    };
    Probe probe;
    probe.x = heads.head(h);
    probe.value = [run](const Matrix& m) { return run(m, false).first; };
    probe.gradient = [run](const Matrix& m) { return run(m, true).second; };
    out.push_back(std::move(probe));
  }
  return out;
}

std::vector<Probe> gen_l_ce(Rng& rng, const Sizes& s) {
  const Matrix logits = uniform(rng, s.n, s.k, -3.0, 3.0);
  const std::vector<int> targets = random_labels(rng, static_cast<std::size_t>(s.n), static_cast<int>(s.k));
  return {taped_probe(logits, [targets](Tape& t, Var v) { return l_ce(t, v, targets); })};
}

std::vector<Probe> gen_l_kd(Rng& rng, const Sizes& s) {
  const Matrix logits = uniform(rng, s.n, s.k, -3.0, 3.0);
  const Matrix previous = softmax_rows(uniform(rng, s.n, s.k, -3.0, 3.0));
  return {taped_probe(logits, [previous](Tape& t, Var v) { return l_kd(t, v, previous); })};
}

std::vector<Probe> gen_l_rld(Rng& rng, const Sizes& s) {
  const Matrix current = uniform(rng, s.n, s.m, -2.0, 2.0);
  const Matrix previous = uniform(rng, s.n, s.m, -2.0, 2.0);
  return {taped_probe(current, [previous](Tape& t, Var v) { return l_rld(t, v, previous); })};
}

std::vector<Probe> gen_l_con(Rng& rng, const Sizes& s) {
  const auto b = static_cast<std::size_t>(s.n);
  const Matrix reps = uniform(rng, 2 * s.n, s.m, -2.0, 2.0);
  std::vector<int> labels = random_labels(rng, b, std::max<int>(2, static_cast<int>(s.k) / 2));
  labels.insert(labels.end(), labels.begin(), labels.end());
  const std::vector<int> twins = stacked_twins(b);
  return {
      taped_probe(reps, [labels, twins](Tape& t, Var v) { return l_con(t, v, labels, twins, true); }),
      taped_probe(reps, [labels, twins](Tape& t, Var v) { return l_con(t, v, labels, twins, false); }),
  };
}

std::vector<Probe> gen_combined(Rng& rng, const Sizes& s) {
  const std::vector<int> dims{static_cast<int>(s.d), static_cast<int>(s.m), static_cast<int>(s.m / 2 + 2)};
  const int rep = dims.back();
  TrainingBatch batch;
  std::vector<Matrix> params;
  std::vector<Matrix> prev_params;
  do {
    batch.original = uniform(rng, s.n, s.d, -2.0, 2.0);
    batch.augmented = batch.original + 0.1 * uniform(rng, s.n, s.d);
    params = random_encoder_params(rng, dims);
    prev_params = random_encoder_params(rng, dims);
  } while (min_abs_preactivation(EncoderModel(dims, params, Activation::relu), batch.original) < 1e-3 ||
           min_abs_preactivation(EncoderModel(dims, params, Activation::relu), batch.augmented) < 1e-3);
  const int k = static_cast<int>(s.k);
  std::vector<int> old_classes(static_cast<std::size_t>(k)), new_classes(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    old_classes[static_cast<std::size_t>(j)] = j;
    new_classes[static_cast<std::size_t>(j)] = k + j;
  }
  batch.labels = random_labels(rng, static_cast<std::size_t>(s.n), 2 * k);
  for (std::size_t i = 0; i < batch.labels.size(); ++i) batch.ids.push_back(static_cast<std::int64_t>(i));

  ClassifierHeads prev_heads(rep);
  prev_heads.extend(old_classes, uniform(rng, rep, k));
  ClassifierHeads heads = prev_heads;
  heads.extend(new_classes, uniform(rng, rep, k));
  const ModelSnapshot previous(EncoderModel(dims, prev_params, Activation::relu), prev_heads);

  PhaseContext ctx;
  ctx.phase = 2;
  ctx.previous = previous;
  ctx.weights = LossWeights{0.7, 0.5, 1.3};

  auto run = [=](std::size_t which, const Matrix& value) {
    std::vector<Matrix> p = params;
    ClassifierHeads h = heads;
    if (which < p.size()) {
      p[which] = value;
    } else {
      h.parameters()[which - p.size()] = value;
    }
    return combined_loss(Learner{EncoderModel(dims, p, Activation::relu), h}, ctx, batch);
  };
  std::vector<Probe> out;
  const std::size_t total = params.size() + heads.head_count();
  for (std::size_t which = 0; which < total; ++which) {
    Probe probe;
    probe.x = which < params.size() ? params[which] : heads.head(which - params.size());
    probe.value = [run, which](const Matrix& m) { return run(which, m).loss.total; };
    probe.gradient = [run, which, n_enc = params.size()](const Matrix& m) {
      const StepResult r = run(which, m);
      return which < n_enc ? r.encoder_grads[which] : r.head_grads[which - n_enc];
    };
    out.push_back(std::move(probe));
  }
  return out;
}

const std::vector<std::pair<std::string, Generator>>& components() {
  static const std::vector<std::pair<std::string, Generator>> table = {
      {"matmul", gen_matmul},   {"add_row", gen_add_row}, {"relu", gen_relu},       {"l2_normalize", gen_l2_normalize},
      {"softmax", gen_softmax}, {"encoder", gen_encoder}, {"heads", gen_heads},     {"l_ce", gen_l_ce},
      {"l_kd", gen_l_kd},       {"l_rld", gen_l_rld},     {"l_con", gen_l_con},     {"combined", gen_combined},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& gradcheck_components() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, _] : components()) out.push_back(name);
    return out;
  }();
  return names;
}

std::vector<ComponentCheck> run_gradcheck(const GradcheckOptions& options) {
  if (options.scale < 1) throw ConfigError("gradcheck: scale must be >= 1");
  if (options.instances < 1) throw ConfigError("gradcheck: instances must be >= 1");
  if (options.inject_fault) {
    const auto& names = gradcheck_components();
    if (std::find(names.begin(), names.end(), *options.inject_fault) == names.end()) {
      throw ConfigError("gradcheck: unknown component '" + *options.inject_fault + "'");
    }
  }
  const Sizes sizes{3 * options.scale, 5 * options.scale, 6 * options.scale, 3 * options.scale};
  std::vector<ComponentCheck> out;
  std::uint64_t index = 0;
  for (const auto& [name, generate] : components()) {
    ComponentCheck check;
    check.name = name;
    const bool faulty = options.inject_fault && *options.inject_fault == name;
    for (int i = 0; i < options.instances; ++i) {
      Rng rng = make_rng(options.seed, {index, static_cast<std::uint64_t>(i)});
      for (const Probe& probe : generate(rng, sizes)) {
        Matrix analytic = probe.gradient(probe.x);
        if (faulty) analytic = -analytic;
        const Matrix numeric = finite_diff_grad(probe.value, probe.x);
        check.max_relative_error = std::max(check.max_relative_error, relative_error(analytic, numeric));
      }
      ++check.instances;
    }
    check.passed = check.max_relative_error < options.tolerance;
    out.push_back(check);
    ++index;
  }
  return out;
}

}  // namespace c4il
