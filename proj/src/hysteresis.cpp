#include "cotloop/hysteresis.hpp"

#include <algorithm>
#include <cstdlib>

namespace cotloop {

std::string_view to_string(Phase phase) noexcept {
  return phase == Phase::normal ? "normal" : "cycle";
}

std::string_view to_string(Transition t) noexcept {
  switch (t) {
    case Transition::none: return "none";
    case Transition::entered_cycle: return "entered_cycle";
    case Transition::exited_cycle: return "exited_cycle";
  }
  return "none";
}

namespace {

void clear_run(ControllerState& s) {
  s.run_length = 0;
  s.anchor_lag.reset();
  s.band_low = s.band_high = 0;
  s.tail_lag = s.tail_count = 0;
}

void start_run(ControllerState& s, int lag) {
  s.run_length = 1;
  s.anchor_lag = lag;
  s.band_low = s.band_high = lag;
  s.tail_lag = lag;
  s.tail_count = 1;
}

void extend_run(ControllerState& s, int lag) {
  ++s.run_length;
  s.band_low = std::min(s.band_low, lag);
  s.band_high = std::max(s.band_high, lag);
  if (lag == s.tail_lag) {
    ++s.tail_count;
  } else {
    s.tail_lag = lag;
    s.tail_count = 1;
  }
}

bool compatible(const ControllerState& s, int lag, EntryRule rule) {
  switch (rule) {
    case EntryRule::band:
      return std::max(s.band_high, lag) - std::min(s.band_low, lag) <= 1;
    case EntryRule::anchored:
      return std::abs(lag - *s.anchor_lag) <= 1;
    case EntryRule::exact:
      return lag == *s.anchor_lag;
  }
  return false;
}

// `lag` broke the current run but qualifies on its own.
void restart_run(ControllerState& s, int lag, EntryRule rule) {
  if (rule == EntryRule::band && std::abs(lag - s.tail_lag) == 1) {
    // The trailing streak of the old run is within one of `lag`, so it stays
    // part of the longest compatible suffix.
    const int kept = s.tail_count;
    const int kept_lag = s.tail_lag;
    s.run_length = kept + 1;
    s.anchor_lag = kept_lag;
    s.band_low = std::min(kept_lag, lag);
    s.band_high = std::max(kept_lag, lag);
    s.tail_lag = lag;
    s.tail_count = 1;
    return;
  }
  start_run(s, lag);
}

}  // namespace

std::pair<ControllerState, Transition> update(const ControllerState& state,
                                              const PeriodEstimate& est,
                                              const DetectorConfig& cfg) {
  ControllerState next = state;
  const bool strong = est.strength >= cfg.rho_star;

  if (state.phase == Phase::cycle) {
    if (!strong || std::abs(est.best_lag - *state.anchor_lag) > 1) {
      next.phase = Phase::normal;
      clear_run(next);
      return {next, Transition::exited_cycle};
    }
    return {next, Transition::none};
  }

  if (!strong) {
    clear_run(next);
    return {next, Transition::none};
  }

  if (next.run_length == 0) {
    start_run(next, est.best_lag);
  } else if (compatible(next, est.best_lag, cfg.entry_rule)) {
    extend_run(next, est.best_lag);
  } else {
    restart_run(next, est.best_lag, cfg.entry_rule);
  }

  if (next.run_length >= cfg.stability) {
    const auto anchor = next.anchor_lag;
    clear_run(next);
    next.phase = Phase::cycle;
    next.anchor_lag = anchor;
    return {next, Transition::entered_cycle};
  }
  return {next, Transition::none};
}

}  // namespace cotloop
