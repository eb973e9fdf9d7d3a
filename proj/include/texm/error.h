#pragma once

#include <stdexcept>
#include <string>

namespace texm {

enum class ErrorCode {
  kInvalidInput,
  kDegenerateInput,
  kShapeMismatch,
  kUnsupportedFormat,
  kTruncatedFile,
  kParse,
  kIo,
  kManifest,
};

const char* to_string(ErrorCode code);

// Every failure in the library surfaces as this exception; `code()` lets
// callers (the CLI in particular) map failures to stable exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace texm
