#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace freqdesign {

enum class ErrorKind {
  Parse,
  Validation,
  InvalidArgument,
  NonConvergence,
  DegenerateModel,
  EigensolveFailure,
  InvalidTau,
  NotHurwitz,
  EffectivelyDefective,
  SingularMatrix,
  GridMismatch,
  InfeasibleRegulation,
  NoRealSolution,
  InfeasibleInertia,
  NonFiniteState,
  NotSettled,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Validation: return "ValidationError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::DegenerateModel: return "DegenerateModel";
    case ErrorKind::EigensolveFailure: return "EigensolveFailure";
    case ErrorKind::InvalidTau: return "InvalidTau";
    case ErrorKind::NotHurwitz: return "NotHurwitz";
    case ErrorKind::EffectivelyDefective: return "EffectivelyDefective";
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::InfeasibleRegulation: return "InfeasibleRegulation";
    case ErrorKind::NoRealSolution: return "NoRealSolution";
    case ErrorKind::InfeasibleInertia: return "InfeasibleInertia";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::NotSettled: return "NotSettled";
  }
  return "Unknown";
}

/// Process exit code for a failure of the given kind:
/// 2 parse/validation, 3 infeasibility, 4 numerical failure.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse:
    case ErrorKind::Validation:
    case ErrorKind::InvalidArgument:
      return 2;
    case ErrorKind::InfeasibleRegulation:
    case ErrorKind::NoRealSolution:
    case ErrorKind::InfeasibleInertia:
      return 3;
    default:
      return 4;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace freqdesign
