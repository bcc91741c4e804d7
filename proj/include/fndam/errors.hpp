#pragma once

#include <stdexcept>
#include <string>

namespace fndam {

/// Base for every error raised by the simulator.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "error"; }
};

/// A voltage or parameter left its physical domain.
class DomainError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "domain"; }
};

class ArgumentError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "argument"; }
};

/// Cell or array initialization (synchronization) failed.
class InitializationError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "initialization"; }
};

/// Discrete update step too large for the linearized decay.
class StepSizeError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "step_size"; }
};

/// Requested weight change not reachable below the amplitude limit.
class SaturationError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "saturation"; }
};

/// Malformed document or config. `path()` points at the offending field.
class ParseError : public Error {
public:
    ParseError(std::string path, const std::string& what)
        : Error(path + ": " + what), path_(std::move(path)) {}
    const char* kind() const noexcept override { return "parse"; }
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace fndam
