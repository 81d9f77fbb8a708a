#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "cotloop/trace_io.hpp"

namespace cotloop {

/// Seeded standard-normal source with a fixed, portable algorithm:
/// raw bits come from std::mt19937_64 (fully specified by the C++
/// standard), uniforms are u = ((x >> 11) + 0.5) * 2^-53, and pairs of
/// normals come from the Box-Muller transform
///   g0 = sqrt(-2 ln u1) cos(2 pi u2),  g1 = sqrt(-2 ln u1) sin(2 pi u2).
/// std::normal_distribution is avoided because its algorithm is
/// implementation-defined.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double uniform();
  double normal();
  void fill_normal(std::span<double> out) {
    for (double& v : out) v = normal();
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

enum class SynthKind { random_walk, periodic, composite };

SynthKind parse_synth_kind(std::string_view text);
std::string_view to_string(SynthKind kind) noexcept;

struct SynthSegment {
  SynthKind kind = SynthKind::random_walk;  // random_walk or periodic
  std::size_t length = 0;
};

/// Synthetic trajectory description.
///
/// random_walk: h_0 ~ N(0, I), h_{t+1} = h_t + step_scale * g_t.
/// periodic:    p anchors drawn once from N(0, I), then
///              h_t = anchor[t mod p] + noise_sigma * g_t.
/// composite:   the segments in order. Each segment continues from the
///              previous segment's last embedding: a walk keeps stepping
///              from it, and periodic anchors are drawn as
///              last + step_scale * g_k.
///
/// Noise vectors are drawn even when noise_sigma is 0, so the random
/// stream does not depend on the noise level.
struct SynthSpec {
  SynthKind kind = SynthKind::random_walk;
  std::size_t dim = 8;
  std::size_t length = 64;
  std::optional<std::size_t> period;
  double noise_sigma = 0.0;
  double step_scale = 1.0;
  std::vector<SynthSegment> segments;
  std::uint64_t seed = 0;
};

/// Throws BadSpec naming the violated constraint.
void validate_spec(const SynthSpec& spec);

/// Deterministic for a fixed spec (including seed).
Trace generate(const SynthSpec& spec);

/// Parses "walk:40,periodic:24" into segments.
std::vector<SynthSegment> parse_segments(std::string_view text);

}  // namespace cotloop
