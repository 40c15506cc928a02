#include "c4il/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace c4il {

Matrix finite_diff_grad(const std::function<double(const Matrix&)>& f, const Matrix& x, double h) {
  if (!(h > 0.0)) throw OracleError("finite_diff_grad: step must be positive");
  Matrix probe = x;
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double orig = probe.data()[i];
    probe.data()[i] = orig + h;
    const double up = f(probe);
    probe.data()[i] = orig - h;
    const double down = f(probe);
    probe.data()[i] = orig;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw OracleError("finite_diff_grad: non-finite evaluation at entry " + std::to_string(i));
    }
    out.data()[i] = (up - down) / (2.0 * h);
  }
  return out;
}

double relative_error(const Matrix& analytic, const Matrix& numeric, double floor) {
  require_same_shape(analytic, numeric, "relative_error");
  const double scale = std::max({analytic.norm(), numeric.norm(), floor});
  return (analytic - numeric).norm() / scale;
}

}  // namespace c4il
