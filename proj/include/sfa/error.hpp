#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sfa {

enum class ErrorCode {
  InvalidMatrix,
  NotPSD,
  DegenerateCovariance,
  InvalidDimension,
  EmptyTrainingSet,
  InsufficientRank,
  InsufficientClassData,
  TooShort,
  DegenerateSequence,
  InvalidDelta,
  OutsideBoundingBox,
  EmptySnippet,
  SingleClass,
  EmptyInput,
  InvalidInput,
  DegenerateSelectivity,
  FormatError,
  TruncatedFile,
  UnsupportedVersion,
  ParseError,
  InvalidSpec,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sfa
