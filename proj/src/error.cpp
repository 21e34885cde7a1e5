#include "regsum/error.hpp"

namespace regsum {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidDecomposition: return "InvalidDecomposition";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::InvalidAxes: return "InvalidAxes";
    case ErrorCode::InvalidEdges: return "InvalidEdges";
    case ErrorCode::EmptyStats: return "EmptyStats";
    case ErrorCode::MissingQuartiles: return "MissingQuartiles";
    case ErrorCode::EdgesMismatch: return "EdgesMismatch";
    case ErrorCode::EmptyHistogram: return "EmptyHistogram";
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::EmptySearchWindow: return "EmptySearchWindow";
    case ErrorCode::Incompatible: return "Incompatible";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::BlockMisaligned: return "BlockMisaligned";
    case ErrorCode::IncompleteTiling: return "IncompleteTiling";
    case ErrorCode::UnknownVariable: return "UnknownVariable";
    case ErrorCode::UnknownRegion: return "UnknownRegion";
    case ErrorCode::UnknownTimestep: return "UnknownTimestep";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidPredicate: return "InvalidPredicate";
    case ErrorCode::EmptySelection: return "EmptySelection";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
  }
  return "Unknown";
}

}  // namespace regsum
