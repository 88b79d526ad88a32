#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fssa {

enum class ErrorCode {
  kInvalidArgument,
  kInsufficientShares,
  kProtocolOrderViolation,
  kAbortRound,
  kInternal,
  kIo,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInsufficientShares: return "InsufficientShares";
    case ErrorCode::kProtocolOrderViolation: return "ProtocolOrderViolation";
    case ErrorCode::kAbortRound: return "AbortRound";
    case ErrorCode::kInternal: return "InternalError";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

// Every failure raised by the library carries one of the codes above so
// callers (and tests) can branch on the kind of failure, not the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::kInvalidArgument, what);
}

}  // namespace fssa
