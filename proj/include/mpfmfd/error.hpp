#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mpfmfd {

// Every failure the library reports. The numeric values are mirrored by the
// C API status codes in mpfmfd.h and must stay in sync.
enum class ErrorCode : int {
  MalformedRow = 1,
  IndexGap,
  NonFinite,
  OutOfRange,
  InvalidSplit,
  InvalidConfig,
  EmptyHistory,
  SeriesTooShort,
  WrongWindowLength,
  ModelKindMismatch,
  NonFiniteLoss,
  VersionMismatch,
  CorruptFile,
  NoOverlap,
  WindowTooLarge,
  WindowTooSmall,
  EmptyStats,
  UnsortedEvents,
  InvalidSpec,
  ReplayWindowUnavailable,
  NoCommonRange,
  NoFaultInMask,
  IoError,
  UsageError,
};

std::string_view error_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace mpfmfd
