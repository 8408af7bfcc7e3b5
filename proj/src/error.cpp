#include "s4/error.hpp"

namespace s4 {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kNotInvertible: return "NotInvertible";
    case ErrorKind::kDuplicateNode: return "DuplicateNode";
    case ErrorKind::kSingularSystem: return "SingularSystem";
    case ErrorKind::kInvalidThreshold: return "InvalidThreshold";
    case ErrorKind::kFieldTooSmall: return "FieldTooSmall";
    case ErrorKind::kNotPrime: return "NotPrime";
    case ErrorKind::kSecretOutOfRange: return "SecretOutOfRange";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kKeyGenFailure: return "KeyGenFailure";
    case ErrorKind::kMessageOutOfRange: return "MessageOutOfRange";
    case ErrorKind::kInvalidCiphertext: return "InvalidCiphertext";
    case ErrorKind::kWidthMismatch: return "WidthMismatch";
    case ErrorKind::kDuplicateId: return "DuplicateId";
    case ErrorKind::kUnknownTable: return "UnknownTable";
    case ErrorKind::kUnknownId: return "UnknownId";
    case ErrorKind::kNegativeValue: return "NegativeValue";
    case ErrorKind::kOverflow: return "Overflow";
    case ErrorKind::kMalformed: return "Malformed";
    case ErrorKind::kPrimeTooSmall: return "PrimeTooSmall";
    case ErrorKind::kEmptySelection: return "EmptySelection";
    case ErrorKind::kInsufficientPairs: return "InsufficientPairs";
    case ErrorKind::kInconsistent: return "Inconsistent";
    case ErrorKind::kKeyMismatch: return "KeyMismatch";
    case ErrorKind::kFormat: return "Format";
    case ErrorKind::kIo: return "Io";
  }
  return "Unknown";
}

int exit_code(ErrorKind kind) {
  // 0 is success, 1 is reserved for unexpected failures and 2 for usage errors.
  return 10 + static_cast<int>(kind);
}

}  // namespace s4
