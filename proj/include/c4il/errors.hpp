#pragma once

#include <stdexcept>
#include <string>

namespace c4il {

// Exception hierarchy shared by every layer. Callers that only care about
// "something was malformed" can catch std::invalid_argument; the CLI maps
// these onto exit codes.

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DegenerateVectorError : std::domain_error {
  using std::domain_error::domain_error;
};

struct LabelError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct NonFiniteError : std::domain_error {
  using std::domain_error::domain_error;
};

// A numerical oracle could not evaluate the function it was given.
struct OracleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operation called at the wrong point of the incremental protocol
// (e.g. a distillation loss before any snapshot exists).
struct ProtocolError : std::logic_error {
  using std::logic_error::logic_error;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DataError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace c4il
