#pragma once

#include <functional>

#include "c4il/numerics/matrix.hpp"

namespace c4il {

inline constexpr double kDefaultFiniteDiffStep = 1e-5;

/// Central-difference gradient of a scalar function:
/// (f(x + h e_i) - f(x - h e_i)) / 2h for every entry i.
/// Throws OracleError when f is non-finite anywhere it is probed.
Matrix finite_diff_grad(const std::function<double(const Matrix&)>& f, const Matrix& x,
                        double h = kDefaultFiniteDiffStep);

/// |a - b|_F / max(|a|_F, |b|_F, floor). Returns 0 when both are below the floor.
double relative_error(const Matrix& analytic, const Matrix& numeric, double floor = 1e-8);

}  // namespace c4il
