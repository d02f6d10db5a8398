#pragma once

#include <stdexcept>
#include <string>

namespace shark {

enum class ErrorCode {
  InvalidArgument,
  Shape,
  Config,
  Validation,
  Io,
  Decode,
  UnsupportedImage,
  Checkpoint,
  VersionMismatch,
  Numeric,
  EmptyDataset,
  Usage,
  Internal,
};

const char* error_code_name(ErrorCode code);

/// All recoverable failures in the core library are thrown as Error; the C
/// boundary maps the code to a shark_status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) raise(code, message);
}

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Shape: return "shape";
    case ErrorCode::Config: return "config";
    case ErrorCode::Validation: return "validation";
    case ErrorCode::Io: return "io";
    case ErrorCode::Decode: return "decode";
    case ErrorCode::UnsupportedImage: return "unsupported_image";
    case ErrorCode::Checkpoint: return "checkpoint";
    case ErrorCode::VersionMismatch: return "version_mismatch";
    case ErrorCode::Numeric: return "numeric";
    case ErrorCode::EmptyDataset: return "empty_dataset";
    case ErrorCode::Usage: return "usage";
    case ErrorCode::Internal: return "internal";
  }
  return "unknown";
}

}  // namespace shark
