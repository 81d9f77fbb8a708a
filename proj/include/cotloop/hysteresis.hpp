#pragma once

#include <optional>
#include <utility>

#include "cotloop/config.hpp"
#include "cotloop/types.hpp"

namespace cotloop {

enum class Phase { normal, cycle };

enum class Transition { none, entered_cycle, exited_cycle };

std::string_view to_string(Phase phase) noexcept;
std::string_view to_string(Transition t) noexcept;

/// Two-state (Normal/Cycle) controller state.
///
/// While in Normal, `run_length` counts the current run of qualifying
/// estimates (strength >= rho_star with mutually compatible lags) and
/// `anchor_lag` holds the lag of the run's first step. In Cycle,
/// `anchor_lag` is the lag the cycle was locked on and exits are measured
/// against it.
struct ControllerState {
  Phase phase = Phase::normal;
  std::optional<int> anchor_lag;
  int run_length = 0;
  bool exited = false;  // an early exit was already emitted in this session

  // Run bookkeeping for EntryRule::band: lag range of the run and the
  // trailing streak of identical lags (needed to restart a run in O(1)).
  int band_low = 0;
  int band_high = 0;
  int tail_lag = 0;
  int tail_count = 0;

  bool operator==(const ControllerState&) const = default;
};

/// Pure transition function of the hysteresis controller.
///
/// Normal: a qualifying estimate extends the run if its lag is compatible
/// with the run under cfg.entry_rule, otherwise it starts a new run (for
/// `band`, the new run keeps the trailing steps still compatible with it).
/// A non-qualifying estimate clears the run. When the run reaches
/// cfg.stability the phase becomes Cycle.
///
/// Cycle: leaves on strength < rho_star or a lag more than one away from
/// the locked anchor.
std::pair<ControllerState, Transition> update(const ControllerState& state,
                                              const PeriodEstimate& est,
                                              const DetectorConfig& cfg);

}  // namespace cotloop
