#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace elliptic {

enum class ErrorKind {
  InvalidMatrix,
  DimMismatch,
  BadArgument,
  BadParams,
  OutOfDomain,
  NotInClassM,
  SamplingExhausted,
  SlackTooLarge,
  NonConvergent,
  ParseError,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidMatrix: return "InvalidMatrix";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::BadArgument: return "BadArgument";
    case ErrorKind::BadParams: return "BadParams";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::NotInClassM: return "NotInClassM";
    case ErrorKind::SamplingExhausted: return "SamplingExhausted";
    case ErrorKind::SlackTooLarge: return "SlackTooLarge";
    case ErrorKind::NonConvergent: return "NonConvergent";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

// Every failure the library reports carries one of the kinds above so callers
// (and the CLI) can branch on it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace elliptic
