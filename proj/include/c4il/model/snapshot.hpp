#pragma once

#include <memory>

#include "c4il/model/encoder.hpp"
#include "c4il/model/heads.hpp"

namespace c4il {

/// Frozen copy of the encoder and heads as they stood at the end of a phase.
/// Copies share the same immutable state, so a snapshot can be handed to any
/// number of readers (including other threads) without synchronization.
class ModelSnapshot {
 public:
  ModelSnapshot(const EncoderModel& encoder, const ClassifierHeads& heads)
      : state_(std::make_shared<const State>(State{encoder, heads})) {}

  const EncoderModel& encoder() const { return state_->encoder; }
  const ClassifierHeads& heads() const { return state_->heads; }

  Matrix encode(const Matrix& batch) const { return state_->encoder.encode(batch); }
  /// Taped forward with every parameter recorded as a constant.
  Var encode(Tape& tape, Var batch) const { return state_->encoder.encode(tape, batch, false).output; }

 private:
  struct State {
    EncoderModel encoder;
    ClassifierHeads heads;
  };
  std::shared_ptr<const State> state_;
};

inline ModelSnapshot snapshot(const EncoderModel& encoder, const ClassifierHeads& heads) {
  return ModelSnapshot(encoder, heads);
}

}  // namespace c4il
