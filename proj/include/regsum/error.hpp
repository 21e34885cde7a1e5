#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace regsum {

enum class ErrorCode {
  InvalidDecomposition,
  OutOfBounds,
  InvalidAxes,
  InvalidEdges,
  EmptyStats,
  MissingQuartiles,
  EdgesMismatch,
  EmptyHistogram,
  InvalidRange,
  EmptySearchWindow,
  Incompatible,
  EmptyInput,
  InvalidConfig,
  BlockMisaligned,
  IncompleteTiling,
  UnknownVariable,
  UnknownRegion,
  UnknownTimestep,
  BadMagic,
  UnsupportedVersion,
  TruncatedFile,
  ChecksumMismatch,
  MalformedFile,
  IoError,
  InvalidPredicate,
  EmptySelection,
  IndexOutOfRange,
  InvalidSpec,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (CLI exit codes, HTTP status mapping, tests) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace regsum
