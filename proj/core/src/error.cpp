#include "arfdx/error.hpp"

namespace arfdx {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOnsetRequired: return "OnsetRequired";
    case ErrorCode::kNoStudy: return "NoStudy";
    case ErrorCode::kNoReviews: return "NoReviews";
    case ErrorCode::kDegenerateMarginals: return "DegenerateMarginals";
    case ErrorCode::kTooFewReviews: return "TooFewReviews";
    case ErrorCode::kBadValue: return "BadValue";
    case ErrorCode::kTooSmall: return "TooSmall";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kDiverged: return "Diverged";
    case ErrorCode::kSingleClass: return "SingleClass";
    case ErrorCode::kNoPositives: return "NoPositives";
    case ErrorCode::kPpvUnattainable: return "PPVUnattainable";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace arfdx
