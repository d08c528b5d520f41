#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hybridtok {

enum class ErrorKind {
  MalformedFile,
  EmptyCorpus,
  SequenceTooShort,
  CorpusTooLarge,
  InvalidMergeTable,
  UnknownToken,
  LossyEncoding,
  RegionTooSmall,
  InvalidBase,
  TokenBudgetExceeded,
  WindowTooShort,
  EmptyStream,
  InvalidArgument,
  InvariantViolation,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::MalformedFile: return "MalformedFile";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::SequenceTooShort: return "SequenceTooShort";
    case ErrorKind::CorpusTooLarge: return "CorpusTooLarge";
    case ErrorKind::InvalidMergeTable: return "InvalidMergeTable";
    case ErrorKind::UnknownToken: return "UnknownToken";
    case ErrorKind::LossyEncoding: return "LossyEncoding";
    case ErrorKind::RegionTooSmall: return "RegionTooSmall";
    case ErrorKind::InvalidBase: return "InvalidBase";
    case ErrorKind::TokenBudgetExceeded: return "TokenBudgetExceeded";
    case ErrorKind::WindowTooShort: return "WindowTooShort";
    case ErrorKind::EmptyStream: return "EmptyStream";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace hybridtok
