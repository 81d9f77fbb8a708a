#pragma once

#include <cstdint>
#include <span>

#include "cotloop/types.hpp"

namespace cotloop {

/// Embeddings with an L2 norm below this are rejected; their cosine is undefined.
inline constexpr double kMinEmbeddingNorm = 1e-12;

/// Magnitude change, cosine similarity and composite signal between two
/// consecutive step embeddings, in one fused pass over the components.
///
/// Throws DimensionMismatch when the sizes differ (or are zero) and
/// ZeroNormVector when either vector is numerically zero.
DynamicsSample compute_transition(std::span<const double> prev, std::span<const double> next,
                                  std::uint64_t transition_index = 0);

inline DynamicsSample compute_transition(const Embedding& prev, const Embedding& next) {
  return compute_transition(prev.values, next.values, prev.step_index);
}

}  // namespace cotloop
