#pragma once

#include <stdexcept>
#include <string>

namespace ifadit {

// Base for every error the library throws. The CLI maps subclasses to
// exit codes: config/usage -> 1, io/format/version -> 2, numeric -> 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A caller violated a documented precondition.
struct ContractError : Error {
    using Error::Error;
};

// Shape or dimension mismatch between tensors.
struct DimensionError : ContractError {
    using ContractError::ContractError;
};

// Invalid configuration value or unknown config key.
struct ConfigError : Error {
    using Error::Error;
};

// Filesystem failure (open/read/write).
struct IoError : Error {
    using Error::Error;
};

// Malformed file contents (bad magic, truncation, inconsistent sizes).
struct FormatError : IoError {
    using IoError::IoError;
};

// Recognized file with an unsupported version number.
struct VersionError : FormatError {
    using FormatError::FormatError;
};

// NaN/Inf or divergence detected in a numeric computation.
struct NumericError : Error {
    using Error::Error;
};

}  // namespace ifadit
