#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rfbm {

enum class ErrorCode {
  DomainError,
  EmbeddingNotNonnegative,
  SizeTooLarge,
  FactorizationFailure,
  SearchBudgetExceeded,
  InfeasibleLevel,
  InvalidCorrelation,
  NotMonotone,
  ExtrapolationUnstable,
  WindowTooSmall,
};

std::string_view to_string(ErrorCode code) noexcept;

// All failures raised by the library carry a code so callers (and the CLI)
// can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::EmbeddingNotNonnegative: return "EmbeddingNotNonnegative";
    case ErrorCode::SizeTooLarge: return "SizeTooLarge";
    case ErrorCode::FactorizationFailure: return "FactorizationFailure";
    case ErrorCode::SearchBudgetExceeded: return "SearchBudgetExceeded";
    case ErrorCode::InfeasibleLevel: return "InfeasibleLevel";
    case ErrorCode::InvalidCorrelation: return "InvalidCorrelation";
    case ErrorCode::NotMonotone: return "NotMonotone";
    case ErrorCode::ExtrapolationUnstable: return "ExtrapolationUnstable";
    case ErrorCode::WindowTooSmall: return "WindowTooSmall";
  }
  return "Unknown";
}

}  // namespace rfbm
