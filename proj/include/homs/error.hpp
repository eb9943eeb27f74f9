#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace homs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A coefficient violates symmetry/positivity requirements.
class InvalidMaterial : public Error {
public:
    using Error::Error;
};

class OutOfDomain : public Error {
public:
    using Error::Error;
};

/// An operation was called before its inputs were ready or with mismatched inputs.
class PreconditionError : public Error {
public:
    using Error::Error;
};

class SolverFailure : public Error {
public:
    SolverFailure(const std::string& what, double achieved_residual)
        : Error(what + " (achieved relative residual " + std::to_string(achieved_residual) + ")"),
          residual_(achieved_residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Non-finite state produced during time stepping.
class BlowupError : public Error {
public:
    explicit BlowupError(std::size_t step)
        : Error("non-finite state at time step " + std::to_string(step)), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

class UndefinedMetric : public Error {
public:
    using Error::Error;
};

/// Configuration problem; carries the offending key.
class ConfigError : public Error {
public:
    ConfigError(std::string key, const std::string& message)
        : Error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace homs
