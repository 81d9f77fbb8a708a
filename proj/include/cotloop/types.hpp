#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace cotloop {

/// One reasoning step's latent vector.
struct Embedding {
  std::vector<double> values;
  std::uint64_t step_index = 0;
};

/// Geometry of the transition from step t to step t + 1.
struct DynamicsSample {
  double delta_mag = 0.0;  // ||h_{t+1} - h_t||_2
  double cos_ang = 1.0;    // cosine similarity, clamped to [-1, 1]
  double z = 0.0;          // delta_mag * (1 - cos_ang)
  std::uint64_t transition_index = 0;

  bool operator==(const DynamicsSample&) const = default;
};

struct LagScore {
  int lag = 0;
  double r = 0.0;

  bool operator==(const LagScore&) const = default;
};

/// Dominant lag within one full window and its correlation.
struct PeriodEstimate {
  int best_lag = 1;
  double strength = 0.0;
  std::optional<std::vector<LagScore>> per_lag;

  bool operator==(const PeriodEstimate&) const = default;
};

enum class EventKind { warmup, normal, cycle_enter, early_exit, cycle_exit };

std::string_view to_string(EventKind kind) noexcept;

struct DetectorEvent {
  std::uint64_t step_index = 0;
  EventKind kind = EventKind::warmup;
  std::optional<PeriodEstimate> estimate;
  std::optional<DynamicsSample> dynamics;

  bool operator==(const DetectorEvent&) const = default;
};

}  // namespace cotloop
