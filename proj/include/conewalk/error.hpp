#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace conewalk {

enum class ErrorCode {
  NonSquare,
  NegativeEntry,
  ZeroColumn,
  InvalidEnsemble,
  InvalidArgument,
  NumericalUnderflow,
  ClosureTooLarge,
  NoConvergence,
  NotPositive,
  NoPositiveProduct,
  TooShort,
  TooFewTrials,
  EpsilonUnderflow,
  KernelTooWide,
  ShiftTooLarge,
  MalformedInput,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this type; `code()` lets callers
// (and the CLI exit-code mapping) distinguish them without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace conewalk
