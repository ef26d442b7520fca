#pragma once

#include <stdexcept>
#include <string>

namespace evfl {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration: bad manifest fields, out-of-range scalars, unknown strategy.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Bad or missing data: schema mismatches, parse failures, insufficient records.
class DataError : public Error {
public:
    using Error::Error;
};

/// Dimension mismatch between vectors/models that should agree.
class ShapeError : public DataError {
public:
    using DataError::DataError;
};

/// Non-finite values where finite ones are required.
class NumericError : public Error {
public:
    using Error::Error;
};

} // namespace evfl
