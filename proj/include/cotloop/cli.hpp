#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cotloop/error.hpp"
#include "cotloop/types.hpp"

namespace cotloop::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;          // a file could not be opened or written
inline constexpr int kExitBadInput = 2;    // malformed trace or stream protocol violation
inline constexpr int kExitBadConfig = 3;   // invalid config, flags or synthetic spec
inline constexpr int kExitEarlyExit = 10;  // one-shot stream emitted early_exit

int exit_code_for(ErrorCode code) noexcept;

/// Runs the command line `args` (without the program name). Stream mode
/// reads frames from `in`; reports and data go to `out`, diagnostics to
/// `err`.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

/// One line of the stream protocol's output, without the trailing newline:
/// {"step":t,"event":"...","rho":float|null,"ell":int|null}
std::string event_line(const DetectorEvent& event);

}  // namespace cotloop::cli
