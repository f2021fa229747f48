#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace promptloop {

/// Root of every error raised by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad configuration: unknown rule ids, missing templates, invalid task files.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A value outside the domain of a mathematical operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// KL divergence with mass on a zero-probability outcome.
class DivergenceUndefinedError : public DomainError {
public:
    using DomainError::DomainError;
};

class TransportError : public Error {
public:
    TransportError(const std::string& what, int status = 0)
        : Error(what), status_(status) {}

    /// HTTP status of the last attempt, 0 when no response was received.
    int status() const noexcept { return status_; }

private:
    int status_;
};

class RateLimitError : public TransportError {
public:
    using TransportError::TransportError;
};

class MalformedResponseError : public Error {
public:
    using Error::Error;
};

/// A backend produced an empty completion.
class EmptyCompletionError : public Error {
public:
    using Error::Error;
};

class GenerationError : public Error {
public:
    using Error::Error;
};

class OptimizerError : public Error {
public:
    using Error::Error;
};

/// Parse failure in a line-oriented input; line is 1-based, 0 when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A run log that cannot be replayed at all (truncated, reordered, unreadable).
class ReplayError : public Error {
public:
    using Error::Error;
};

}  // namespace promptloop
