#pragma once

#include <stdexcept>
#include <string>

namespace rolekit {

/// Broad failure category. The CLI maps each one to its exit code.
enum class ErrorKind {
  validation = 1,
  transport = 2,
  parse = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

/// A value violates a type invariant or an argument is out of range.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

/// An operation was invoked in a state it does not accept (stage ordering,
/// double annotation, wrong dialogue origin).
class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

/// A template slot was left unresolved or filled with an empty value.
class RenderError : public Error {
 public:
  explicit RenderError(const std::string& what) : Error(ErrorKind::validation, what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string raw = {})
      : Error(ErrorKind::parse, what), raw_(std::move(raw)) {}

  /// The text that failed to parse, when available.
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

class TransportError : public Error {
 public:
  TransportError(const std::string& what, bool retryable, int status = 0)
      : Error(ErrorKind::transport, what), retryable_(retryable), status_(status) {}

  bool retryable() const noexcept { return retryable_; }
  /// HTTP status when the failure came from a response, 0 otherwise.
  int status() const noexcept { return status_; }

 private:
  bool retryable_;
  int status_;
};

/// The backend answered but the answer is unusable (empty completion,
/// malformed response body).
class ProtocolError : public Error {
 public:
  explicit ProtocolError(const std::string& what) : Error(ErrorKind::transport, what) {}
};

}  // namespace rolekit
