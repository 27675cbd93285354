#pragma once

#include <stdexcept>
#include <string>

namespace amber {

// Invalid configuration (bad layer chain, bad k, bad hyperparameter). CLI exit 1.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad or missing data (unparseable file, empty set, label out of range). CLI exit 2.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Dimension mismatch between a matrix and what an operation expects.
struct ShapeError : DataError {
    explicit ShapeError(const std::string& msg) : DataError(msg) {}
};

// Numeric failure (non-finite parameters, singular solve). CLI exit 3.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace amber
