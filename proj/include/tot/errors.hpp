#pragma once

#include <stdexcept>
#include <string>

namespace tot {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed argument to a value type (empty thought, bad block name, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Unknown node id or registry name.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// A thought sequence that does not describe a valid world configuration.
class InvalidStateError : public Error {
 public:
  using Error::Error;
};

/// Text that does not match a domain grammar.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// An action whose preconditions do not hold. `fact()` names the first failing one.
class PreconditionError : public Error {
 public:
  explicit PreconditionError(std::string fact)
      : Error("precondition " + fact + " fails"), fact_(std::move(fact)) {}
  const std::string& fact() const noexcept { return fact_; }

 private:
  std::string fact_;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

class ScoringError : public Error {
 public:
  using Error::Error;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Failure talking to a model backend.
class BackendError : public Error {
 public:
  enum class Kind { transport, status, malformed, context_overflow, exhausted_transcript };

  BackendError(Kind kind, std::string what, bool retryable, int status = 0)
      : Error(std::move(what)), kind_(kind), retryable_(retryable), status_(status) {}

  Kind kind() const noexcept { return kind_; }
  bool retryable() const noexcept { return retryable_; }
  int status() const noexcept { return status_; }

 private:
  Kind kind_;
  bool retryable_;
  int status_;
};

}  // namespace tot
