#pragma once

#include <stdexcept>
#include <string>

namespace sensnet {

enum class ErrorKind {
  kParse,
  kValidation,
  kDimension,
  kRange,
  kSingularWeight,
  kZeroProbability,
  kPrunedState,
  kSizeGuard,
  kApproxPrecondition,
  kUnknownLabel,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Process exit status used by the CLI for each error family.
//   3 parse, 4 validation, 5 inference, 6 size guard,
//   7 approximation precondition, 8 unknown label.
int exit_code(ErrorKind kind) noexcept;

const char* to_string(ErrorKind kind) noexcept;

}  // namespace sensnet
