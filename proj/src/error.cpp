#include "sfa/error.hpp"

namespace sfa {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidMatrix: return "InvalidMatrix";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::DegenerateCovariance: return "DegenerateCovariance";
    case ErrorCode::InvalidDimension: return "InvalidDimension";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::InsufficientRank: return "InsufficientRank";
    case ErrorCode::InsufficientClassData: return "InsufficientClassData";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::DegenerateSequence: return "DegenerateSequence";
    case ErrorCode::InvalidDelta: return "InvalidDelta";
    case ErrorCode::OutsideBoundingBox: return "OutsideBoundingBox";
    case ErrorCode::EmptySnippet: return "EmptySnippet";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::DegenerateSelectivity: return "DegenerateSelectivity";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace sfa
