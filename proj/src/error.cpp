#include "cotloop/error.hpp"

namespace cotloop {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::WindowTooSmall: return "WindowTooSmall";
    case ErrorCode::BadThreshold: return "BadThreshold";
    case ErrorCode::ZeroStability: return "ZeroStability";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroNormVector: return "ZeroNormVector";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::WindowNotFull: return "WindowNotFull";
    case ErrorCode::BadLag: return "BadLag";
    case ErrorCode::SessionTerminated: return "SessionTerminated";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::BadSpec: return "BadSpec";
    case ErrorCode::ProtocolError: return "ProtocolError";
  }
  return "Unknown";
}

}  // namespace cotloop
