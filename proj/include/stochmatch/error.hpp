#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stochmatch {

enum class ErrorCode {
  DuplicateEdge,
  SelfLoop,
  BadProbability,
  BadVertex,
  Overflow,
  NotAMatching,
  TooLarge,
  NotAugmentable,
  NotAugmenting,
  BadEpsilon,
  CoverageViolation,
  BadSpec,
  BadFormat,
  BadConfig,
  BadAxis,
  Io,
  CertificateFailure,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::BadProbability: return "BadProbability";
    case ErrorCode::BadVertex: return "BadVertex";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::NotAMatching: return "NotAMatching";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::NotAugmentable: return "NotAugmentable";
    case ErrorCode::NotAugmenting: return "NotAugmenting";
    case ErrorCode::BadEpsilon: return "BadEpsilon";
    case ErrorCode::CoverageViolation: return "CoverageViolation";
    case ErrorCode::BadSpec: return "BadSpec";
    case ErrorCode::BadFormat: return "BadFormat";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::BadAxis: return "BadAxis";
    case ErrorCode::Io: return "Io";
    case ErrorCode::CertificateFailure: return "CertificateFailure";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace stochmatch
