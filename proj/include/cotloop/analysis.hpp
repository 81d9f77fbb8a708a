#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cotloop/config.hpp"
#include "cotloop/trace_io.hpp"
#include "cotloop/types.hpp"

namespace cotloop {

// Offline analysis of whole traces. Every stage has a serial reference
// and an OpenMP version; both run the same per-element kernels, so their
// outputs are identical and either reproduces what a streaming
// DetectorSession emits for the same records.

enum class Exec { serial, parallel };

/// One sample per transition (trace.size() - 1 of them).
std::vector<DynamicsSample> trajectory_dynamics(const Trace& trace, Exec exec = Exec::parallel);

/// Entry k is the estimate for trace step k, present once k >= cfg.window.
std::vector<std::optional<PeriodEstimate>> window_estimates(std::span<const DynamicsSample> dynamics,
                                                            const DetectorConfig& cfg,
                                                            Exec exec = Exec::parallel,
                                                            bool with_diagnostics = false);

/// Runs the hysteresis controller over precomputed per-step inputs and
/// assembles the event stream. Stops after early_exit in one-shot mode.
std::vector<DetectorEvent> replay_events(std::span<const DynamicsSample> dynamics,
                                         std::span<const std::optional<PeriodEstimate>> estimates,
                                         const DetectorConfig& cfg);

/// Event stream for a whole trace; equals pushing the records one by one
/// into a DetectorSession.
std::vector<DetectorEvent> analyze_trace(const Trace& trace, const DetectorConfig& cfg,
                                         Exec exec = Exec::parallel, bool with_diagnostics = false);

/// analyze_trace over independent traces, parallel across traces.
std::vector<std::vector<DetectorEvent>> analyze_batch(std::span<const Trace> traces,
                                                      const DetectorConfig& cfg,
                                                      Exec exec = Exec::parallel);

/// Step of the first entered cycle (cycle_enter or early_exit), if any.
std::optional<std::uint64_t> first_detection(std::span<const DetectorEvent> events);

/// First detection under `cfg` using precomputed estimates, without
/// building the event stream.
std::optional<std::uint64_t> first_detection(std::span<const std::optional<PeriodEstimate>> estimates,
                                             const DetectorConfig& cfg);

struct SweepCell {
  double rho_star = 0.0;
  int stability = 0;
  std::optional<std::uint64_t> detection_step;
  std::uint64_t steps_saved = 0;  // trace length - (detection_step + 1), 0 without detection
  std::uint64_t length = 0;

  bool operator==(const SweepCell&) const = default;
};

/// Grid of (rho_star x stability) over one trace, row-major in rho_star.
/// Window estimates do not depend on either axis and are computed once.
/// Throws BadConfig on an empty grid and the config errors for invalid cells.
std::vector<SweepCell> sweep(const Trace& trace, const DetectorConfig& base,
                             std::span<const double> rho_grid, std::span<const int> stability_grid,
                             Exec exec = Exec::parallel);

}  // namespace cotloop
