#pragma once

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tagfeed {

enum class ErrorCode {
  MissingFile,
  MissingColumn,
  MalformedRow,
  InvalidConfig,
  EmptyMapping,
  UnknownStudent,
  InvalidTagSet,
  InvalidTemplate,
  EmptyInput,
  NetworkError,
  RateLimited,
  AuthError,
  BackendError,
};

inline constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::EmptyMapping: return "EmptyMapping";
    case ErrorCode::UnknownStudent: return "UnknownStudent";
    case ErrorCode::InvalidTagSet: return "InvalidTagSet";
    case ErrorCode::InvalidTemplate: return "InvalidTemplate";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NetworkError: return "NetworkError";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::AuthError: return "AuthError";
    case ErrorCode::BackendError: return "BackendError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::chrono::milliseconds> retry_after = std::nullopt)
      : std::runtime_error(message), code_(code), retry_after_(retry_after) {}

  ErrorCode code() const noexcept { return code_; }

  /// Server-suggested delay before retrying, when one was given.
  std::optional<std::chrono::milliseconds> retry_after() const noexcept { return retry_after_; }

  bool retryable() const noexcept {
    return code_ == ErrorCode::NetworkError || code_ == ErrorCode::RateLimited;
  }

 private:
  ErrorCode code_;
  std::optional<std::chrono::milliseconds> retry_after_;
};

}  // namespace tagfeed
