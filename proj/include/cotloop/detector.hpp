#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cotloop/config.hpp"
#include "cotloop/hysteresis.hpp"
#include "cotloop/signal_window.hpp"
#include "cotloop/types.hpp"

namespace cotloop {

/// One streaming detection session over a single chain of thought.
///
/// Each push() consumes the next step embedding and returns exactly one
/// event. The first W + 1 pushes (W = cfg.window) are warmup: the window
/// needs W transitions before any correlation is computed.
///
/// Not thread-safe; a session may move between threads between calls.
class DetectorSession {
 public:
  /// Throws if `cfg` does not pass validate_config.
  explicit DetectorSession(DetectorConfig cfg);

  DetectorEvent push(std::span<const double> embedding);
  DetectorEvent push(std::span<const float> embedding);
  DetectorEvent push(const Embedding& embedding) { return push(embedding.values); }

  /// Back to a fresh session with the same config.
  void reset();

  const DetectorConfig& config() const noexcept { return cfg_; }
  std::optional<std::size_t> dim() const noexcept { return dim_; }
  std::uint64_t steps_seen() const noexcept { return steps_seen_; }
  const SignalWindow& window() const noexcept { return window_; }
  const ControllerState& controller() const noexcept { return controller_; }

  /// True once a one-shot session has emitted early_exit.
  bool terminated() const noexcept {
    return cfg_.exit_mode == ExitMode::one_shot && controller_.exited;
  }

  /// Per-lag correlations are attached to estimates when enabled.
  void set_diagnostics(bool on) noexcept { diagnostics_ = on; }

 private:
  DetectorEvent ingest(std::vector<double> values);

  DetectorConfig cfg_;
  std::optional<std::size_t> dim_;
  std::vector<double> last_;
  SignalWindow window_;
  ControllerState controller_;
  std::uint64_t steps_seen_ = 0;
  bool diagnostics_ = false;
};

/// Maps a controller transition to the event the session reports, updating
/// the exited flag for one-shot sessions.
EventKind classify(Transition t, ControllerState& state, ExitMode mode);

}  // namespace cotloop
