#include "cotloop/detector.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "cotloop/dynamics.hpp"
#include "cotloop/error.hpp"
#include "cotloop/periodicity.hpp"

namespace cotloop {

std::string_view to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::warmup: return "warmup";
    case EventKind::normal: return "normal";
    case EventKind::cycle_enter: return "cycle_enter";
    case EventKind::early_exit: return "early_exit";
    case EventKind::cycle_exit: return "cycle_exit";
  }
  return "warmup";
}

EventKind classify(Transition t, ControllerState& state, ExitMode mode) {
  switch (t) {
    case Transition::none: return EventKind::normal;
    case Transition::exited_cycle: return EventKind::cycle_exit;
    case Transition::entered_cycle:
      if (mode == ExitMode::one_shot && !state.exited) {
        state.exited = true;
        return EventKind::early_exit;
      }
      return EventKind::cycle_enter;
  }
  return EventKind::normal;
}

DetectorSession::DetectorSession(DetectorConfig cfg)
    : cfg_((validate_config(cfg), cfg)), window_(static_cast<std::size_t>(cfg.window)) {}

void DetectorSession::reset() {
  dim_.reset();
  last_.clear();
  window_.clear();
  controller_ = {};
  steps_seen_ = 0;
}

DetectorEvent DetectorSession::push(std::span<const double> embedding) {
  return ingest(std::vector<double>(embedding.begin(), embedding.end()));
}

DetectorEvent DetectorSession::push(std::span<const float> embedding) {
  return ingest(std::vector<double>(embedding.begin(), embedding.end()));
}

DetectorEvent DetectorSession::ingest(std::vector<double> values) {
  if (terminated()) {
    throw Error(ErrorCode::SessionTerminated,
                "session already emitted early_exit; reset() before pushing again");
  }
  if (values.empty()) {
    throw Error(ErrorCode::DimensionMismatch, "embedding at step " + std::to_string(steps_seen_) +
                                                  " is empty");
  }
  if (dim_ && values.size() != *dim_) {
    throw Error(ErrorCode::DimensionMismatch,
                "embedding at step " + std::to_string(steps_seen_) + " has dimension " +
                    std::to_string(values.size()) + ", expected " + std::to_string(*dim_));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorCode::NonFiniteInput, "embedding at step " + std::to_string(steps_seen_) +
                                                 " has a non-finite value at index " +
                                                 std::to_string(i));
    }
  }

  DetectorEvent ev;
  ev.step_index = steps_seen_;

  if (!dim_) {
    double sq = 0.0;
    for (double v : values) sq += v * v;
    if (std::sqrt(sq) < kMinEmbeddingNorm) {
      throw Error(ErrorCode::ZeroNormVector, "embedding at step 0 has zero norm");
    }
    dim_ = values.size();
    last_ = std::move(values);
    ++steps_seen_;
    return ev;
  }

  const DynamicsSample dyn = compute_transition(last_, values, steps_seen_ - 1);
  last_ = std::move(values);
  ++steps_seen_;
  window_.push(dyn.z);
  ev.dynamics = dyn;
  if (!window_.full()) return ev;

  PeriodEstimate est = best_period(window_, cfg_, diagnostics_);
  auto [next, transition] = update(controller_, est, cfg_);
  controller_ = next;
  ev.kind = classify(transition, controller_, cfg_.exit_mode);
  ev.estimate = std::move(est);
  return ev;
}

}  // namespace cotloop
