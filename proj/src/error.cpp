#include "conewalk/error.hpp"

namespace conewalk {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::ZeroColumn: return "ZeroColumn";
    case ErrorCode::InvalidEnsemble: return "InvalidEnsemble";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NumericalUnderflow: return "NumericalUnderflow";
    case ErrorCode::ClosureTooLarge: return "ClosureTooLarge";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotPositive: return "NotPositive";
    case ErrorCode::NoPositiveProduct: return "NoPositiveProduct";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::TooFewTrials: return "TooFewTrials";
    case ErrorCode::EpsilonUnderflow: return "EpsilonUnderflow";
    case ErrorCode::KernelTooWide: return "KernelTooWide";
    case ErrorCode::ShiftTooLarge: return "ShiftTooLarge";
    case ErrorCode::MalformedInput: return "MalformedInput";
  }
  return "Unknown";
}

}  // namespace conewalk
