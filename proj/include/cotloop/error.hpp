#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cotloop {

enum class ErrorCode {
  // configuration
  WindowTooSmall,
  BadThreshold,
  ZeroStability,
  BadConfig,
  // embeddings / dynamics
  DimensionMismatch,
  ZeroNormVector,
  NonFiniteInput,
  // periodicity
  WindowNotFull,
  BadLag,
  // session
  SessionTerminated,
  // trace files
  MalformedHeader,
  MalformedRecord,
  TruncatedFile,
  NonFiniteValue,
  IoError,
  // synthetic generation
  BadSpec,
  // stream protocol
  ProtocolError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cotloop
