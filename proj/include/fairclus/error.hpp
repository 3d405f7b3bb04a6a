#pragma once

#include <stdexcept>
#include <string>

namespace fairclus {

enum class ErrorKind {
  Parse,
  Validation,
  Color,
  IndexOutOfRange,
  EmptyCluster,
  Infeasible,
  BudgetExceeded,
  ContractViolation,
  Numerical,
  Backend,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Color: return "color";
    case ErrorKind::IndexOutOfRange: return "index-out-of-range";
    case ErrorKind::EmptyCluster: return "empty-cluster";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::BudgetExceeded: return "budget-exceeded";
    case ErrorKind::ContractViolation: return "contract-violation";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Backend: return "backend";
  }
  return "unknown";
}

// Single exception type for the library; callers dispatch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), message_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  // The text without the kind prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

// Process exit code used by the CLI for a given failure.
inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Infeasible: return 2;
    case ErrorKind::ContractViolation:
    case ErrorKind::Numerical: return 3;
    default: return 1;
  }
}

}  // namespace fairclus
