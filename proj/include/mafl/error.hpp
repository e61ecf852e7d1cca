#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mafl {

enum class ErrorKind {
  UnsupportedDimension,
  InvalidResolution,
  NonFinite,
  GridMismatch,
  InvalidArgument,
  ConeViolation,
  StepRejected,
  DtUnderflow,
  EmptySupport,
  WindowMismatch,
  Infeasible,
  Unresolved,
  PatchTooSmall,
  HypothesisViolated,
  Io,
  Schema,
};

std::string_view to_string(ErrorKind kind);

/// All library failures carry a machine-readable kind next to the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnsupportedDimension: return "unsupported-dimension";
    case ErrorKind::InvalidResolution: return "invalid-resolution";
    case ErrorKind::NonFinite: return "non-finite";
    case ErrorKind::GridMismatch: return "grid-mismatch";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::ConeViolation: return "cone-violation";
    case ErrorKind::StepRejected: return "step-rejected";
    case ErrorKind::DtUnderflow: return "dt-underflow";
    case ErrorKind::EmptySupport: return "empty-support";
    case ErrorKind::WindowMismatch: return "window-mismatch";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::Unresolved: return "unresolved";
    case ErrorKind::PatchTooSmall: return "patch-too-small";
    case ErrorKind::HypothesisViolated: return "hypothesis-violated";
    case ErrorKind::Io: return "io";
    case ErrorKind::Schema: return "schema";
  }
  return "unknown";
}

}  // namespace mafl
