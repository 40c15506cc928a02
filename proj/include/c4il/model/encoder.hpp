#pragma once

#include <span>
#include <vector>

#include "c4il/numerics/rng.hpp"
#include "c4il/numerics/tape.hpp"

namespace c4il {

enum class Activation { relu, identity };

/// Multilayer perceptron encoder mapping d-dimensional inputs to m-dimensional
/// representations. The nonlinearity is applied after every layer except the
/// last, so the representation itself is an affine readout.
class EncoderModel {
 public:
  /// dims = {d, hidden..., m}; needs at least two entries. Weights use
  /// uniform Kaiming initialization, biases start at zero.
  EncoderModel(std::vector<int> dims, Rng& rng, Activation activation = Activation::relu);

  /// Construct from explicit parameters (checkpoint loading, tests).
  /// params = {W0, b0, W1, b1, ...} with W_l of shape dims[l] x dims[l+1].
  EncoderModel(std::vector<int> dims, std::vector<Matrix> params, Activation activation);

  const std::vector<int>& dims() const { return dims_; }
  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }
  Activation activation() const { return activation_; }
  std::size_t layer_count() const { return dims_.size() - 1; }

  /// Forward pass without gradient tracking; bit-identical to the taped path.
  Matrix encode(const Matrix& batch) const;

  struct Taped {
    Var output;
    std::vector<Var> params;  // leaves, in parameters() order; empty when frozen
  };
  /// Forward pass recorded on `tape`. With trainable == false the parameters
  /// are recorded as constants and receive no gradient.
  Taped encode(Tape& tape, Var batch, bool trainable = true) const;

  std::span<Matrix> parameters() { return params_; }
  std::span<const Matrix> parameters() const { return params_; }
  std::size_t parameter_count() const;

  friend bool operator==(const EncoderModel&, const EncoderModel&);

 private:
  void validate() const;

  std::vector<int> dims_;
  std::vector<Matrix> params_;
  Activation activation_;
};

}  // namespace c4il
