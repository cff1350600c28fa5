#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace salience {

/// Broad failure class; the CLI maps each one to a process exit code.
enum class ErrorKind {
    Config,     // exit 2
    Transport,  // exit 3
    Numerical,  // exit 4
    Schema,     // exit 5
    Io,         // exit 1
    Logic,      // exit 1
};

int exit_code_for(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

/// Malformed input record. `line` is 1-based when the error came from a line-oriented file.
class SchemaError : public Error {
public:
    SchemaError(const std::string& what, std::optional<std::size_t> line = std::nullopt)
        : Error(ErrorKind::Schema, line ? "line " + std::to_string(*line) + ": " + what : what),
          line_(line),
          detail_(what) {}
    std::optional<std::size_t> line() const noexcept { return line_; }
    /// Message without the line prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    std::optional<std::size_t> line_;
    std::string detail_;
};

class TransportError : public Error {
public:
    TransportError(const std::string& what, int status = 0)
        : Error(ErrorKind::Transport, what), status_(status) {}
    int status() const noexcept { return status_; }

private:
    int status_;
};

class AuthError : public TransportError {
public:
    AuthError(const std::string& what, int status) : TransportError(what, status) {}
};

class QuotaError : public TransportError {
public:
    QuotaError(const std::string& what, int status) : TransportError(what, status) {}
};

/// Video has comments turned off. Callers skip the video instead of failing.
class CommentsDisabled : public TransportError {
public:
    CommentsDisabled(const std::string& what, int status) : TransportError(what, status) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class OutOfWindow : public Error {
public:
    explicit OutOfWindow(const std::string& what) : Error(ErrorKind::Logic, what) {}
};

class TooFewPoints : public Error {
public:
    explicit TooFewPoints(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class ProviderError : public Error {
public:
    ProviderError(const std::string& what, std::string failing_id = {})
        : Error(ErrorKind::Transport, what), failing_id_(std::move(failing_id)) {}
    const std::string& failing_id() const noexcept { return failing_id_; }

private:
    std::string failing_id_;
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class ParseFailure : public Error {
public:
    ParseFailure(const std::string& what, std::string raw_response)
        : Error(ErrorKind::Logic, what), raw_response_(std::move(raw_response)) {}
    const std::string& raw_response() const noexcept { return raw_response_; }

private:
    std::string raw_response_;
};

class MissingDecision : public Error {
public:
    explicit MissingDecision(const std::string& what) : Error(ErrorKind::Logic, what) {}
};

class DegenerateInput : public Error {
public:
    explicit DegenerateInput(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

class IssueSetMismatch : public Error {
public:
    explicit IssueSetMismatch(const std::string& what) : Error(ErrorKind::Logic, what) {}
};

}  // namespace salience
