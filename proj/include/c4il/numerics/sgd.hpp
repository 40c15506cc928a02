#pragma once

#include <span>
#include <vector>

#include "c4il/numerics/matrix.hpp"

namespace c4il {

struct SgdOptions {
  double learning_rate = 0.01;
  double momentum = 0.0;      // in [0, 1)
  double weight_decay = 0.0;  // L2 coefficient folded into the gradient
};

/// One momentum-SGD step, in place:
///   v <- momentum * v + (g + weight_decay * p);  p <- p - lr * v.
/// `velocity` is resized to match on first use.
void sgd_step(std::span<Matrix> params, std::span<const Matrix> grads, std::vector<Matrix>& velocity,
              const SgdOptions& options);

/// Step-decay schedule: base * gamma^(floor(epoch / every)). every == 0 disables decay.
double step_decay(double base, int epoch, int every, double gamma);

}  // namespace c4il
