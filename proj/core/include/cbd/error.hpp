#pragma once

#include <stdexcept>
#include <string>

namespace cbd {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad or inconsistent configuration (maps to a usage failure at the CLI).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed, missing, or inconsistent input data.
class DataError : public Error {
public:
    using Error::Error;
};

// Non-finite values during training or optimization.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace cbd
