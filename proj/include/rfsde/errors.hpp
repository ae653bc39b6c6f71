#pragma once

#include <stdexcept>
#include <string>

namespace rfsde {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed configuration, unknown key, or DSL syntax problem.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Numerical failure: non-PSD covariance, tube gap collapse, evaluation fault.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
public:
    using Error::Error;
};

} // namespace rfsde
