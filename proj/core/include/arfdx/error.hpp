#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace arfdx {

enum class ErrorCode {
  kOnsetRequired,
  kNoStudy,
  kNoReviews,
  kDegenerateMarginals,
  kTooFewReviews,
  kBadValue,
  kTooSmall,
  kFormatError,
  kDiverged,
  kSingleClass,
  kNoPositives,
  kPpvUnattainable,
  kShapeMismatch,
  kInvalidArgument,
};

std::string_view to_string(ErrorCode code);

// Domain failure raised by the pipeline modules. The CLI maps these to exit
// status 1.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Missing files, unreadable paths, bad configuration. Exit status 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace arfdx
