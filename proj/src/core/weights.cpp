#include "c4il/core/weights.hpp"

#include <string>

#include "c4il/errors.hpp"

namespace c4il {

void LossSchedule::validate() const {
  if (beta1 < 0.0 || lambda < 0.0 || kappa1 < 0.0 || eta1 < 0.0) {
    throw ConfigError("loss schedule: all coefficients must be >= 0");
  }
}

LossWeights weights_for_phase(const LossSchedule& schedule, int phase, int old_classes, int seen_classes) {
  schedule.validate();
  if (phase < 1) throw ConfigError("loss schedule: phases are numbered from 1");
  if (seen_classes <= 0 || old_classes < 0 || old_classes >= seen_classes) {
    throw ConfigError("loss schedule: need 0 <= old classes < seen classes, got " + std::to_string(old_classes) +
                      " / " + std::to_string(seen_classes));
  }
  LossWeights w;
  w.beta = schedule.beta1;
  for (int t = 2; t <= phase; ++t) w.beta += schedule.lambda * (t - 1);
  if (phase >= 2) {
    w.kappa = schedule.kappa1 * static_cast<double>(old_classes) / static_cast<double>(seen_classes);
    w.eta = schedule.eta1;
  }
  return w;
}

}  // namespace c4il
