#include "sensnet/error.hpp"

namespace sensnet {

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kParse:
      return 3;
    case ErrorKind::kValidation:
    case ErrorKind::kDimension:
      return 4;
    case ErrorKind::kRange:
    case ErrorKind::kSingularWeight:
    case ErrorKind::kZeroProbability:
    case ErrorKind::kPrunedState:
      return 5;
    case ErrorKind::kSizeGuard:
      return 6;
    case ErrorKind::kApproxPrecondition:
      return 7;
    case ErrorKind::kUnknownLabel:
      return 8;
  }
  return 1;
}

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kValidation: return "validation error";
    case ErrorKind::kDimension: return "dimension error";
    case ErrorKind::kRange: return "range error";
    case ErrorKind::kSingularWeight: return "singular-weight error";
    case ErrorKind::kZeroProbability: return "zero-probability error";
    case ErrorKind::kPrunedState: return "pruned-state error";
    case ErrorKind::kSizeGuard: return "size-guard error";
    case ErrorKind::kApproxPrecondition: return "approximation precondition error";
    case ErrorKind::kUnknownLabel: return "unknown label";
  }
  return "error";
}

}  // namespace sensnet
