#pragma once

#include <stdexcept>
#include <string>

namespace cass {

// Invalid argument values: bad bpm, shape mismatch, out-of-range index.
// Maps to CLI exit code 2.
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Invalid or inconsistent configuration: non-COLA STFT setup, bad network
// spec, missing cross weights. Also exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Unreadable, corrupt or inconsistent data files. Exit code 3.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite losses and other numeric failures. Exit code 4.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Mathematically undefined request (e.g. relative error against a zero-norm
// reference, log of a nonpositive value). A kind of numeric failure.
struct DomainError : NumericError {
    using NumericError::NumericError;
};

} // namespace cass
