#pragma once

#include <span>

#include "cotloop/config.hpp"
#include "cotloop/signal_window.hpp"
#include "cotloop/types.hpp"

namespace cotloop {

/// Segments whose population standard deviation falls below this are
/// treated as flat and contribute r = 0.
inline constexpr double kDegenerateStd = 1e-12;

/// Two lags whose correlations differ by less than this are considered tied;
/// the smaller lag wins. Exact-period signals otherwise produce ties that
/// differ only by rounding.
inline constexpr double kLagTieTolerance = 1e-12;

struct SegmentStats {
  double mean = 0.0;
  double std = 0.0;  // population convention (divides by length)
  int length = 0;
};

SegmentStats segment_stats(std::span<const double> segment);

/// Pearson correlation between the newest W - lag samples of `window` and
/// the W - lag samples that precede them by `lag` steps. Each segment is
/// standardized against its own mean and standard deviation. `window` is
/// ordered oldest-first and must hold the full window.
///
/// Throws BadLag unless 1 <= lag <= window.size() - 2.
double lag_correlation(std::span<const double> window, int lag);

/// As above; throws WindowNotFull unless the window is at capacity.
double lag_correlation(const SignalWindow& window, int lag);

/// Evaluates every lag in [1, p_max] and returns the maximizer, preferring
/// the smallest lag among ties. `window.size()` must equal cfg.window.
PeriodEstimate best_period(std::span<const double> window, const DetectorConfig& cfg,
                           bool with_diagnostics = false);

PeriodEstimate best_period(const SignalWindow& window, const DetectorConfig& cfg,
                           bool with_diagnostics = false);

}  // namespace cotloop
