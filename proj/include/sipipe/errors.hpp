#pragma once

#include <stdexcept>
#include <string>

namespace sipipe {

// Bad user input: pipeline config, hyperparameters, malformed data files.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical failure: mass underflow, degenerate directions, solver breakdown.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Internal inconsistency in the pipeline runtime (should not happen on valid input).
struct EngineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace sipipe
