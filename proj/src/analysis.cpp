#include "cotloop/analysis.hpp"

#include <cmath>
#include <exception>
#include <string>

#include "cotloop/detector.hpp"
#include "cotloop/dynamics.hpp"
#include "cotloop/error.hpp"
#include "cotloop/hysteresis.hpp"
#include "cotloop/periodicity.hpp"

namespace cotloop {

namespace {

// Runs body(i) for i in [0, n). Under Exec::parallel the loop is an OpenMP
// worksharing loop; the exception thrown for the smallest index is rethrown.
template <typename Body>
void for_each_index(std::size_t n, Exec exec, Body&& body) {
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::size_t first_bad = n;
  std::exception_ptr err;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(cotloop_for_each_index)
      {
        if (static_cast<std::size_t>(i) < first_bad) {
          first_bad = static_cast<std::size_t>(i);
          err = std::current_exception();
        }
      }
    }
  }
  if (err) std::rethrow_exception(err);
}

// Same checks, in the same order, that DetectorSession applies on push.
void check_records(const Trace& trace) {
  if (trace.empty()) return;
  const std::size_t dim = trace.records.front().embedding.size();
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const auto& values = trace.records[k].embedding;
    if (values.empty() || values.size() != dim) {
      throw Error(ErrorCode::DimensionMismatch, "embedding at step " + std::to_string(k) +
                                                    " has dimension " + std::to_string(values.size()) +
                                                    ", expected " + std::to_string(dim));
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i])) {
        throw Error(ErrorCode::NonFiniteInput, "embedding at step " + std::to_string(k) +
                                                   " has a non-finite value at index " +
                                                   std::to_string(i));
      }
    }
  }
  double sq = 0.0;
  for (double v : trace.records.front().embedding) sq += v * v;
  if (std::sqrt(sq) < kMinEmbeddingNorm) {
    throw Error(ErrorCode::ZeroNormVector, "embedding at step 0 has zero norm");
  }
}

}  // namespace

std::vector<DynamicsSample> trajectory_dynamics(const Trace& trace, Exec exec) {
  if (trace.size() < 2) return {};
  std::vector<DynamicsSample> out(trace.size() - 1);
  for_each_index(out.size(), exec, [&](std::size_t t) {
    out[t] = compute_transition(trace.records[t].embedding, trace.records[t + 1].embedding, t);
  });
  return out;
}

std::vector<std::optional<PeriodEstimate>> window_estimates(std::span<const DynamicsSample> dynamics,
                                                            const DetectorConfig& cfg, Exec exec,
                                                            bool with_diagnostics) {
  validate_config(cfg);
  const std::size_t steps = dynamics.empty() ? 0 : dynamics.size() + 1;
  std::vector<std::optional<PeriodEstimate>> out(steps);
  const auto w = static_cast<std::size_t>(cfg.window);
  if (dynamics.size() < w) return out;

  std::vector<double> z(dynamics.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = dynamics[i].z;

  // Step k (k >= W) sees the transitions k-W .. k-1.
  const std::size_t first = w;
  for_each_index(steps - first, exec, [&](std::size_t i) {
    const std::size_t step = first + i;
    const std::span<const double> window(z.data() + (step - w), w);
    out[step] = best_period(window, cfg, with_diagnostics);
  });
  return out;
}

std::vector<DetectorEvent> replay_events(std::span<const DynamicsSample> dynamics,
                                         std::span<const std::optional<PeriodEstimate>> estimates,
                                         const DetectorConfig& cfg) {
  std::vector<DetectorEvent> events;
  events.reserve(estimates.size());
  ControllerState state;
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    DetectorEvent ev;
    ev.step_index = k;
    if (k > 0) ev.dynamics = dynamics[k - 1];
    if (estimates[k]) {
      auto [next, transition] = update(state, *estimates[k], cfg);
      state = next;
      ev.kind = classify(transition, state, cfg.exit_mode);
      ev.estimate = estimates[k];
    }
    events.push_back(std::move(ev));
    if (events.back().kind == EventKind::early_exit) break;
  }
  return events;
}

std::vector<DetectorEvent> analyze_trace(const Trace& trace, const DetectorConfig& cfg, Exec exec,
                                         bool with_diagnostics) {
  validate_config(cfg);
  check_records(trace);
  if (trace.size() == 1) return {DetectorEvent{}};
  const auto dynamics = trajectory_dynamics(trace, exec);
  const auto estimates = window_estimates(dynamics, cfg, exec, with_diagnostics);
  return replay_events(dynamics, estimates, cfg);
}

std::vector<std::vector<DetectorEvent>> analyze_batch(std::span<const Trace> traces,
                                                      const DetectorConfig& cfg, Exec exec) {
  std::vector<std::vector<DetectorEvent>> out(traces.size());
  for_each_index(traces.size(), exec,
                 [&](std::size_t i) { out[i] = analyze_trace(traces[i], cfg, Exec::serial); });
  return out;
}

std::optional<std::uint64_t> first_detection(std::span<const DetectorEvent> events) {
  for (const auto& ev : events) {
    if (ev.kind == EventKind::cycle_enter || ev.kind == EventKind::early_exit) return ev.step_index;
  }
  return std::nullopt;
}

std::optional<std::uint64_t> first_detection(std::span<const std::optional<PeriodEstimate>> estimates,
                                             const DetectorConfig& cfg) {
  ControllerState state;
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    if (!estimates[k]) continue;
    auto [next, transition] = update(state, *estimates[k], cfg);
    if (transition == Transition::entered_cycle) return k;
    state = next;
  }
  return std::nullopt;
}

std::vector<SweepCell> sweep(const Trace& trace, const DetectorConfig& base,
                             std::span<const double> rho_grid, std::span<const int> stability_grid,
                             Exec exec) {
  if (rho_grid.empty() || stability_grid.empty()) {
    throw Error(ErrorCode::BadConfig, "sweep grid is empty");
  }
  std::vector<SweepCell> cells;
  cells.reserve(rho_grid.size() * stability_grid.size());
  for (double rho : rho_grid) {
    for (int m : stability_grid) {
      DetectorConfig cfg = base;
      cfg.rho_star = rho;
      cfg.stability = m;
      validate_config(cfg);
      SweepCell cell;
      cell.rho_star = rho;
      cell.stability = m;
      cell.length = trace.size();
      cells.push_back(cell);
    }
  }

  validate_config(base);
  check_records(trace);
  const auto dynamics = trajectory_dynamics(trace, exec);
  const auto estimates = window_estimates(dynamics, base, exec);

  for_each_index(cells.size(), exec, [&](std::size_t i) {
    SweepCell& cell = cells[i];
    DetectorConfig cfg = base;
    cfg.rho_star = cell.rho_star;
    cfg.stability = cell.stability;
    cell.detection_step = first_detection(estimates, cfg);
    cell.steps_saved = cell.detection_step ? cell.length - (*cell.detection_step + 1) : 0;
  });
  return cells;
}

}  // namespace cotloop
