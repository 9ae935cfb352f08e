#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace occfluct {

enum class ErrorKind {
  // Invalid or unsuitable input.
  InvalidInput,
  NotIrreducible,
  DisconnectedGraph,
  NotDetailedBalance,
  LocalDetailedBalanceViolated,
  ConstraintInfeasible,
  // Numerical failure on valid input.
  SolverFailure,
  StepSizeUnderflow,
  CertificateFailed,
  OverflowGuard,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::NotIrreducible: return "NotIrreducible";
    case ErrorKind::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorKind::NotDetailedBalance: return "NotDetailedBalance";
    case ErrorKind::LocalDetailedBalanceViolated: return "LocalDetailedBalanceViolated";
    case ErrorKind::ConstraintInfeasible: return "ConstraintInfeasible";
    case ErrorKind::SolverFailure: return "SolverFailure";
    case ErrorKind::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorKind::CertificateFailed: return "CertificateFailed";
    case ErrorKind::OverflowGuard: return "OverflowGuard";
  }
  return "Unknown";
}

/// True for kinds caused by the caller's input rather than by the numerics.
constexpr bool is_input_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput:
    case ErrorKind::NotIrreducible:
    case ErrorKind::DisconnectedGraph:
    case ErrorKind::NotDetailedBalance:
    case ErrorKind::LocalDetailedBalanceViolated:
    case ErrorKind::ConstraintInfeasible:
      return true;
    default:
      return false;
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

}  // namespace occfluct
