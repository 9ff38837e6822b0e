#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace strux {

enum class ErrorKind {
  EmptyInput,
  MissingQuery,
  UnexpectedQuery,
  InvalidContext,
  DimensionMismatch,
  EmptySide,
  LengthMismatch,
  UnknownLabel,
  SampleSetMismatch,
  MissingEmbedder,
  ProviderError,
  AuthError,
  ConfigError,
  IoError,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Non-retryable after exhausting attempts; carries the last HTTP status and body.
class ProviderError : public Error {
 public:
  ProviderError(int status, std::string body, const std::string& message)
      : Error(ErrorKind::ProviderError, message), status_(status), body_(std::move(body)) {}

  int status() const { return status_; }
  const std::string& body() const { return body_; }

 private:
  int status_;
  std::string body_;
};

class AuthError : public Error {
 public:
  AuthError(int status, const std::string& message)
      : Error(ErrorKind::AuthError, message), status_(status) {}

  int status() const { return status_; }

 private:
  int status_;
};

}  // namespace strux
