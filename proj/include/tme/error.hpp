#pragma once

#include <stdexcept>
#include <string>

namespace tme {

enum class ErrorCode {
  invalid_argument,
  not_found,
  illegal_state,
  illegal_transition,
  illegal_merge,
  illegal_rollback,
  duplicate_link,
  schema_error,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::not_found: return "not-found";
    case ErrorCode::illegal_state: return "illegal-state";
    case ErrorCode::illegal_transition: return "illegal-transition";
    case ErrorCode::illegal_merge: return "illegal-merge";
    case ErrorCode::illegal_rollback: return "illegal-rollback";
    case ErrorCode::duplicate_link: return "duplicate-link";
    case ErrorCode::schema_error: return "schema-error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace tme
