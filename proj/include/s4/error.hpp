#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace s4 {

// Every failure the library reports carries one of these kinds. The CLI maps
// each kind to its own process exit code.
enum class ErrorKind {
  kInvalidArgument,
  kNotInvertible,
  kDuplicateNode,
  kSingularSystem,
  kInvalidThreshold,
  kFieldTooSmall,
  kNotPrime,
  kSecretOutOfRange,
  kLengthMismatch,
  kKeyGenFailure,
  kMessageOutOfRange,
  kInvalidCiphertext,
  kWidthMismatch,
  kDuplicateId,
  kUnknownTable,
  kUnknownId,
  kNegativeValue,
  kOverflow,
  kMalformed,
  kPrimeTooSmall,
  kEmptySelection,
  kInsufficientPairs,
  kInconsistent,
  kKeyMismatch,
  kFormat,
  kIo,
};

std::string_view error_kind_name(ErrorKind kind);

// Process exit code for a failure of the given kind. Never 0 or 1; codes are
// unique per kind.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
        kind_(kind),
        message_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  // The message without the kind prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

}  // namespace s4
