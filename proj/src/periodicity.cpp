#include "cotloop/periodicity.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "cotloop/error.hpp"

namespace cotloop {

SegmentStats segment_stats(std::span<const double> segment) {
  SegmentStats s;
  s.length = static_cast<int>(segment.size());
  if (segment.empty()) return s;

  double sum = 0.0;
  for (double v : segment) sum += v;
  s.mean = sum / static_cast<double>(segment.size());

  double sq = 0.0;
  for (double v : segment) {
    const double d = v - s.mean;
    sq += d * d;
  }
  s.std = std::sqrt(sq / static_cast<double>(segment.size()));
  return s;
}

double lag_correlation(std::span<const double> window, int lag) {
  const int size = static_cast<int>(window.size());
  if (lag < 1 || size - lag < 2) {
    throw Error(ErrorCode::BadLag, "lag " + std::to_string(lag) + " invalid for a window of " +
                                       std::to_string(size) + " samples");
  }
  const auto n = static_cast<std::size_t>(size - lag);
  const auto current = window.subspan(static_cast<std::size_t>(lag), n);
  const auto lagged = window.subspan(0, n);

  const SegmentStats cur = segment_stats(current);
  const SegmentStats lag_stats = segment_stats(lagged);
  if (cur.std < kDegenerateStd || lag_stats.std < kDegenerateStd) return 0.0;

  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = (current[i] - cur.mean) / cur.std;
    const double b = (lagged[i] - lag_stats.mean) / lag_stats.std;
    acc += a * b;
  }
  return std::clamp(acc / static_cast<double>(n), -1.0, 1.0);
}

double lag_correlation(const SignalWindow& window, int lag) {
  if (!window.full()) {
    throw Error(ErrorCode::WindowNotFull, "window holds " + std::to_string(window.size()) +
                                              " of " + std::to_string(window.capacity()) +
                                              " samples");
  }
  const std::vector<double> linear = window.to_vector();
  return lag_correlation(std::span<const double>(linear), lag);
}

PeriodEstimate best_period(std::span<const double> window, const DetectorConfig& cfg,
                           bool with_diagnostics) {
  if (static_cast<int>(window.size()) != cfg.window) {
    throw Error(ErrorCode::WindowNotFull, "window holds " + std::to_string(window.size()) +
                                              " of " + std::to_string(cfg.window) + " samples");
  }

  PeriodEstimate est;
  est.best_lag = 1;
  est.strength = -2.0;
  if (with_diagnostics) est.per_lag.emplace().reserve(static_cast<std::size_t>(cfg.p_max));

  for (int lag = 1; lag <= cfg.p_max; ++lag) {
    const double r = lag_correlation(window, lag);
    if (with_diagnostics) est.per_lag->push_back({lag, r});
    if (r > est.strength + kLagTieTolerance) {
      est.best_lag = lag;
      est.strength = r;
    }
  }
  return est;
}

PeriodEstimate best_period(const SignalWindow& window, const DetectorConfig& cfg,
                           bool with_diagnostics) {
  if (!window.full() || static_cast<int>(window.capacity()) != cfg.window) {
    throw Error(ErrorCode::WindowNotFull, "window holds " + std::to_string(window.size()) +
                                              " of " + std::to_string(cfg.window) + " samples");
  }
  constexpr std::size_t kStackWindow = 256;
  if (window.size() <= kStackWindow) {
    std::array<double, kStackWindow> buf;
    window.linearize(buf);
    return best_period(std::span<const double>(buf.data(), window.size()), cfg, with_diagnostics);
  }
  const std::vector<double> linear = window.to_vector();
  return best_period(std::span<const double>(linear), cfg, with_diagnostics);
}

}  // namespace cotloop
