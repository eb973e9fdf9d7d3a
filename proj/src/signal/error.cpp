#include "texm/error.h"

namespace texm {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "invalid-input";
    case ErrorCode::kDegenerateInput: return "degenerate-input";
    case ErrorCode::kShapeMismatch: return "shape-mismatch";
    case ErrorCode::kUnsupportedFormat: return "unsupported-format";
    case ErrorCode::kTruncatedFile: return "truncated-file";
    case ErrorCode::kParse: return "parse-error";
    case ErrorCode::kIo: return "io-error";
    case ErrorCode::kManifest: return "manifest-error";
  }
  return "unknown";
}

}  // namespace texm
