#include "c4il/model/encoder.hpp"

#include <cmath>
#include <string>

#include "c4il/numerics/ops.hpp"

namespace c4il {

EncoderModel::EncoderModel(std::vector<int> dims, Rng& rng, Activation activation)
    : dims_(std::move(dims)), activation_(activation) {
  if (dims_.size() < 2) throw ShapeError("encoder: need at least input and output dims");
  for (int d : dims_) {
    if (d <= 0) throw ShapeError("encoder: layer dims must be positive");
  }
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    const double bound = std::sqrt(6.0 / dims_[l]);
    std::uniform_real_distribution<double> u(-bound, bound);
    Matrix w(dims_[l], dims_[l + 1]);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = u(rng);
    params_.push_back(std::move(w));
    params_.push_back(Matrix::Zero(1, dims_[l + 1]));
  }
}

EncoderModel::EncoderModel(std::vector<int> dims, std::vector<Matrix> params, Activation activation)
    : dims_(std::move(dims)), params_(std::move(params)), activation_(activation) {
  validate();
}

void EncoderModel::validate() const {
  if (dims_.size() < 2) throw ShapeError("encoder: need at least input and output dims");
  if (params_.size() != 2 * (dims_.size() - 1)) {
    throw ShapeError("encoder: expected " + std::to_string(2 * (dims_.size() - 1)) + " parameter matrices, got " +
                     std::to_string(params_.size()));
  }
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    const Matrix& w = params_[2 * l];
    const Matrix& b = params_[2 * l + 1];
    if (w.rows() != dims_[l] || w.cols() != dims_[l + 1]) {
      throw ShapeError("encoder: layer " + std::to_string(l) + " weight is " + shape_of(w) + ", expected " +
                       std::to_string(dims_[l]) + "x" + std::to_string(dims_[l + 1]));
    }
    if (b.rows() != 1 || b.cols() != dims_[l + 1]) {
      throw ShapeError("encoder: layer " + std::to_string(l) + " bias is " + shape_of(b));
    }
  }
}

Matrix EncoderModel::encode(const Matrix& batch) const {
  if (batch.cols() != input_dim()) {
    throw ShapeError("encode: batch " + shape_of(batch) + " does not match input dim " +
                     std::to_string(input_dim()));
  }
  Matrix h = batch;
  for (std::size_t l = 0; l < layer_count(); ++l) {
    Matrix z = h * params_[2 * l];
    z = z.rowwise() + params_[2 * l + 1].row(0);
    if (l + 1 < layer_count() && activation_ == Activation::relu) z = z.cwiseMax(0.0);
    h = std::move(z);
  }
  return h;
}

EncoderModel::Taped EncoderModel::encode(Tape& tape, Var batch, bool trainable) const {
  if (tape.value(batch).cols() != input_dim()) {
    throw ShapeError("encode: batch " + shape_of(tape.value(batch)) + " does not match input dim " +
                     std::to_string(input_dim()));
  }
  Taped out;
  Var h = batch;
  for (std::size_t l = 0; l < layer_count(); ++l) {
    const Var w = tape.leaf(params_[2 * l], trainable);
    const Var b = tape.leaf(params_[2 * l + 1], trainable);
    if (trainable) {
      out.params.push_back(w);
      out.params.push_back(b);
    }
    h = add_row(tape, matmul(tape, h, w), b);
    if (l + 1 < layer_count() && activation_ == Activation::relu) h = relu(tape, h);
  }
  out.output = h;
  return out;
}

std::size_t EncoderModel::parameter_count() const {
  std::size_t n = 0;
  for (const Matrix& p : params_) n += static_cast<std::size_t>(p.size());
  return n;
}

bool operator==(const EncoderModel& a, const EncoderModel& b) {
  if (a.dims_ != b.dims_ || a.activation_ != b.activation_ || a.params_.size() != b.params_.size()) return false;
  for (std::size_t i = 0; i < a.params_.size(); ++i) {
    if (a.params_[i].rows() != b.params_[i].rows() || a.params_[i].cols() != b.params_[i].cols()) return false;
    if (a.params_[i] != b.params_[i]) return false;
  }
  return true;
}

}  // namespace c4il
