#include "mpfmfd/error.hpp"

namespace mpfmfd {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::IndexGap: return "IndexGap";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::InvalidSplit: return "InvalidSplit";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::EmptyHistory: return "EmptyHistory";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::WrongWindowLength: return "WrongWindowLength";
    case ErrorCode::ModelKindMismatch: return "ModelKindMismatch";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::NoOverlap: return "NoOverlap";
    case ErrorCode::WindowTooLarge: return "WindowTooLarge";
    case ErrorCode::WindowTooSmall: return "WindowTooSmall";
    case ErrorCode::EmptyStats: return "EmptyStats";
    case ErrorCode::UnsortedEvents: return "UnsortedEvents";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::ReplayWindowUnavailable: return "ReplayWindowUnavailable";
    case ErrorCode::NoCommonRange: return "NoCommonRange";
    case ErrorCode::NoFaultInMask: return "NoFaultInMask";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UsageError: return "UsageError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace mpfmfd
