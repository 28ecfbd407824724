#pragma once

#include <stdexcept>
#include <string>

namespace natcop {

enum class ErrorKind {
  kInvalidArgument,
  kNumericalDomain,
  kDegenerateDensity,
  kInsufficientData,
  kIllConditionedFit,
  kIo,
  kParse,
  kEmptySide,
  kSolverStall,
  kEstimationInfeasible,
  kModel,
};

const char* to_string(ErrorKind kind) noexcept;

/// Library-wide exception. The kind distinguishes usage mistakes from data
/// and numerical failures; the CLI maps every kind to exit code 2.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid argument";
    case ErrorKind::kNumericalDomain: return "numerical domain error";
    case ErrorKind::kDegenerateDensity: return "degenerate density";
    case ErrorKind::kInsufficientData: return "insufficient data";
    case ErrorKind::kIllConditionedFit: return "ill-conditioned fit";
    case ErrorKind::kIo: return "io error";
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kEmptySide: return "empty side";
    case ErrorKind::kSolverStall: return "solver stall";
    case ErrorKind::kEstimationInfeasible: return "estimation infeasible";
    case ErrorKind::kModel: return "model error";
  }
  return "error";
}

}  // namespace natcop
