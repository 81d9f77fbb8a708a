#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "cotloop/error.hpp"

namespace cotloop {

enum class ExitMode { one_shot, monitor };

// How the hysteresis controller decides that consecutive period estimates
// belong to the same cycle while counting toward entry.
//
//   band     - the run is the longest suffix of qualifying steps whose lags
//              span at most one (e.g. 4,5,4,4,5). Default.
//   anchored - lags must stay within +-1 of the run's first lag.
//   exact    - lags must all be equal.
enum class EntryRule { band, anchored, exact };

struct DetectorConfig {
  double rho_star = 0.7;  // correlation threshold
  int p_max = 8;          // largest candidate period
  int window = 32;        // number of z-samples in the sliding window
  int stability = 8;      // consecutive qualifying estimates required to enter a cycle
  ExitMode exit_mode = ExitMode::one_shot;
  EntryRule entry_rule = EntryRule::band;

  bool operator==(const DetectorConfig&) const = default;
};

/// Returns std::nullopt when the config is usable, otherwise the first
/// violated constraint (checked in the order window, threshold, stability).
std::optional<Error> check_config(const DetectorConfig& cfg);

/// Throws the error reported by check_config.
void validate_config(const DetectorConfig& cfg);

std::string_view to_string(ExitMode mode) noexcept;
std::string_view to_string(EntryRule rule) noexcept;
ExitMode parse_exit_mode(std::string_view text);
EntryRule parse_entry_rule(std::string_view text);

/// Applies `key = value` lines to `cfg`. Blank lines and `#` comments are
/// skipped, string values may be quoted. Keys this library does not know
/// are left alone so the same file can carry adapter settings.
/// The result is not validated.
void apply_config_text(DetectorConfig& cfg, std::string_view text);
DetectorConfig load_config_file(const std::filesystem::path& path, DetectorConfig base = {});

}  // namespace cotloop
