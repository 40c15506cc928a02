#include "c4il/numerics/sgd.hpp"

#include <cmath>
#include <string>

namespace c4il {

void sgd_step(std::span<Matrix> params, std::span<const Matrix> grads, std::vector<Matrix>& velocity,
              const SgdOptions& options) {
  if (!(options.learning_rate > 0.0)) throw std::invalid_argument("sgd_step: learning rate must be > 0");
  if (options.momentum < 0.0 || options.momentum >= 1.0) {
    throw std::invalid_argument("sgd_step: momentum must lie in [0, 1)");
  }
  if (params.size() != grads.size()) {
    throw ShapeError("sgd_step: " + std::to_string(params.size()) + " params but " +
                     std::to_string(grads.size()) + " gradients");
  }
  if (velocity.size() != params.size()) {
    velocity.clear();
    for (const Matrix& p : params) velocity.push_back(Matrix::Zero(p.rows(), p.cols()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    require_same_shape(params[i], grads[i], "sgd_step");
    require_same_shape(params[i], velocity[i], "sgd_step velocity");
    velocity[i] = options.momentum * velocity[i] + grads[i];
    if (options.weight_decay != 0.0) velocity[i] += options.weight_decay * params[i];
    params[i] -= options.learning_rate * velocity[i];
  }
}

double step_decay(double base, int epoch, int every, double gamma) {
  if (every <= 0) return base;
  return base * std::pow(gamma, epoch / every);
}

}  // namespace c4il
