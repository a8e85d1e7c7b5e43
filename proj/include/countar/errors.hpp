#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace countar {

/// Root of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shapes of matrices or vectors do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// An argument lies outside the domain of the operation (negative intensity,
/// non-finite entry, out-of-range index).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A model or experiment description is inconsistent.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A quantity that requires a spectral radius below one was given a matrix
/// that does not have it.
class StationarityError : public Error {
public:
    using Error::Error;
};

/// Floating-point failure: singular solve, sampler cap exceeded.
class NumericError : public Error {
public:
    using Error::Error;
};

/// A trajectory left the representable range. Carries the time index at
/// which it happened.
class DivergenceError : public Error {
public:
    DivergenceError(std::int64_t time_index, const std::string& what)
        : Error("divergence at t=" + std::to_string(time_index) + ": " + what),
          time_index_(time_index)
    {
    }

    std::int64_t time_index() const noexcept { return time_index_; }

private:
    std::int64_t time_index_;
};

}  // namespace countar
