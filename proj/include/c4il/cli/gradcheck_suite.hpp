#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace c4il {

struct GradcheckOptions {
  std::uint64_t seed = 0;
  int scale = 1;              // multiplies every tensor size
  int instances = 100;        // random instances per component
  double tolerance = 1e-4;    // on the max relative error
  std::optional<std::string> inject_fault;  // negate this component's analytic gradient
};

struct ComponentCheck {
  std::string name;
  int instances = 0;
  double max_relative_error = 0.0;
  bool passed = false;
};

/// Component names in the order they are checked.
const std::vector<std::string>& gradcheck_components();

/// Finite-difference verification of every layer and loss. Throws
/// ConfigError for an unknown fault-injection target or non-positive scale.
std::vector<ComponentCheck> run_gradcheck(const GradcheckOptions& options);

}  // namespace c4il
