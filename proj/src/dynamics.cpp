#include "cotloop/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cotloop/error.hpp"

namespace cotloop {

DynamicsSample compute_transition(std::span<const double> prev, std::span<const double> next,
                                  std::uint64_t transition_index) {
  if (prev.size() != next.size() || prev.empty()) {
    throw Error(ErrorCode::DimensionMismatch, "cannot compare embeddings of dimension " +
                                                  std::to_string(prev.size()) + " and " +
                                                  std::to_string(next.size()));
  }

  double dot = 0.0;
  double prev_sq = 0.0;
  double next_sq = 0.0;
  double diff_sq = 0.0;
  for (std::size_t i = 0; i < prev.size(); ++i) {
    const double a = prev[i];
    const double b = next[i];
    const double d = b - a;
    dot += a * b;
    prev_sq += a * a;
    next_sq += b * b;
    diff_sq += d * d;
  }

  const double prev_norm = std::sqrt(prev_sq);
  const double next_norm = std::sqrt(next_sq);
  if (prev_norm < kMinEmbeddingNorm || next_norm < kMinEmbeddingNorm) {
    throw Error(ErrorCode::ZeroNormVector,
                "embedding at transition " + std::to_string(transition_index) +
                    " has zero norm; cosine similarity is undefined");
  }

  DynamicsSample out;
  out.transition_index = transition_index;
  out.delta_mag = std::sqrt(diff_sq);
  out.cos_ang = std::clamp(dot / (prev_norm * next_norm), -1.0, 1.0);
  out.z = out.delta_mag * (1.0 - out.cos_ang);
  return out;
}

}  // namespace cotloop
