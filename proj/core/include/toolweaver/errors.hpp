#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace toolweaver {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text (records, completions, files). `line` is 1-based, 0 when unknown.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what, std::size_t line = 0)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A caller broke an operation's precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Configuration or contract violation detected before any work happens.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Filesystem or socket failure.
class IoError : public Error {
public:
    using Error::Error;
};

/// A generator cannot apply to the given tool (e.g. no required parameters to drop).
class InapplicableError : public Error {
public:
    using Error::Error;
};

/// Backend produced output that could not be turned into the requested artifact.
class GenerationError : public Error {
public:
    using Error::Error;
};

enum class BackendErrorKind {
    timeout,           ///< request did not complete within the configured timeout
    transient,         ///< connection failure, 429 or 5xx; retryable
    non_retryable,     ///< 4xx or malformed response; retrying will not help
    retries_exhausted, ///< transient failures outlasted max_retries
};

std::string_view to_string(BackendErrorKind kind);

/// Infrastructure failure of a text-generation or embedding provider.
class BackendError : public Error {
public:
    BackendError(BackendErrorKind kind, const std::string& what)
        : Error(what), kind_(kind), cause_(kind) {}
    BackendError(BackendErrorKind kind, BackendErrorKind cause, const std::string& what)
        : Error(what), kind_(kind), cause_(cause) {}

    BackendErrorKind kind() const noexcept { return kind_; }
    /// For retries_exhausted, the classification of the last failure.
    BackendErrorKind cause() const noexcept { return cause_; }
    bool retryable() const noexcept {
        return kind_ == BackendErrorKind::timeout || kind_ == BackendErrorKind::transient;
    }

private:
    BackendErrorKind kind_;
    BackendErrorKind cause_;
};

} // namespace toolweaver
