#pragma once

#include <stdexcept>
#include <string>

namespace pcrnn {

// Base class for everything thrown by this library. The CLI maps these to
// exit codes; anything else escaping is a bug.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tensor shape disagreement (dimensions named in the message).
struct ShapeError : Error {
  using Error::Error;
};

// Structural misuse of a recorded graph (seed not in graph, foreign tensor).
struct GraphError : Error {
  using Error::Error;
};

// Softmax/attention over a fully masked position set.
struct MaskError : Error {
  using Error::Error;
};

// Category id outside the configured vocabulary.
struct VocabError : Error {
  using Error::Error;
};

// Caller broke a documented precondition (lengths, counts, ranges).
struct ContractError : Error {
  using Error::Error;
};

// Configuration file or flag value rejected by validation.
struct ConfigError : Error {
  using Error::Error;
};

// Input file malformed: missing column, bad header, bad magic.
struct SchemaError : Error {
  using Error::Error;
};

// Events out of time order where sorted input is required.
struct OrderingError : Error {
  using Error::Error;
};

// Degenerate normalization span, non-finite objective, similar numeric dead ends.
struct NumericError : Error {
  using Error::Error;
};

// Hawkes parameters with alpha >= beta (non-stationary regime).
struct StationarityError : Error {
  using Error::Error;
};

// Non-finite gradient or inconsistent optimizer state; names the parameter.
struct OptimError : Error {
  using Error::Error;
};

}  // namespace pcrnn
