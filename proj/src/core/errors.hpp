#pragma once

#include <stdexcept>
#include <string>

namespace sca {

// Error taxonomy mirrored by the C API status codes.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Incompatible tensor shapes for an operation.
struct ShapeError : Error {
    using Error::Error;
};

// Bad user-facing configuration (keys, ranges, experiment names).
struct ConfigError : Error {
    using Error::Error;
};

// NaN/Inf or other numerical breakdown.
struct NumericError : Error {
    using Error::Error;
};

// API precondition violated by the caller.
struct ContractError : Error {
    using Error::Error;
};

// File format / filesystem problems.
struct IoError : Error {
    using Error::Error;
};

} // namespace sca
