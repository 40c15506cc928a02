#pragma once

namespace c4il {

/// Base coefficients of the combined objective
///   L = L_ce + beta_t L_con + kappa_t L_kd + eta_t L_rld.
struct LossSchedule {
  double beta1 = 1.0;
  double lambda = 0.1;
  double kappa1 = 1.0;
  double eta1 = 1.0;

  /// Throws ConfigError on a negative coefficient.
  void validate() const;
};

struct LossWeights {
  double beta = 0.0;
  double kappa = 0.0;
  double eta = 0.0;
};

/// Weights for 1-based phase t:
///   beta_t  = beta_{t-1} + lambda (t - 1)
///   kappa_t = kappa1 * old_classes / seen_classes
///   eta_t   = eta1
/// kappa and eta are reported as 0 at t = 1, where no previous model exists.
LossWeights weights_for_phase(const LossSchedule& schedule, int phase, int old_classes, int seen_classes);

}  // namespace c4il
