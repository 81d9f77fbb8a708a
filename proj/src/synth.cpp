#include "cotloop/synth.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <string>

#include "cotloop/error.hpp"

namespace cotloop {

double NormalStream::uniform() {
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  return (static_cast<double>(engine_() >> 11) + 0.5) * kScale;
}

double NormalStream::normal() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(theta);
  return radius * std::cos(theta);
}

SynthKind parse_synth_kind(std::string_view text) {
  if (text == "random_walk" || text == "walk") return SynthKind::random_walk;
  if (text == "periodic") return SynthKind::periodic;
  if (text == "composite") return SynthKind::composite;
  throw Error(ErrorCode::BadSpec, "unknown trajectory kind '" + std::string(text) + "'");
}

std::string_view to_string(SynthKind kind) noexcept {
  switch (kind) {
    case SynthKind::random_walk: return "random_walk";
    case SynthKind::periodic: return "periodic";
    case SynthKind::composite: return "composite";
  }
  return "random_walk";
}

std::vector<SynthSegment> parse_segments(std::string_view text) {
  std::vector<SynthSegment> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const std::string_view item = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);

    const auto colon = item.find(':');
    if (colon == std::string_view::npos) {
      throw Error(ErrorCode::BadSpec, "segment '" + std::string(item) + "' is not kind:length");
    }
    SynthSegment seg;
    seg.kind = parse_synth_kind(item.substr(0, colon));
    if (seg.kind == SynthKind::composite) {
      throw Error(ErrorCode::BadSpec, "segments cannot be composite");
    }
    const auto len = item.substr(colon + 1);
    auto [ptr, ec] = std::from_chars(len.data(), len.data() + len.size(), seg.length);
    if (ec != std::errc{} || ptr != len.data() + len.size()) {
      throw Error(ErrorCode::BadSpec, "bad segment length '" + std::string(len) + "'");
    }
    out.push_back(seg);
  }
  return out;
}

void validate_spec(const SynthSpec& spec) {
  if (spec.dim < 1) throw Error(ErrorCode::BadSpec, "dim must be >= 1");
  if (!(spec.noise_sigma >= 0.0) || !std::isfinite(spec.noise_sigma)) {
    throw Error(ErrorCode::BadSpec, "noise_sigma must be a finite value >= 0");
  }
  if (!(spec.step_scale > 0.0) || !std::isfinite(spec.step_scale)) {
    throw Error(ErrorCode::BadSpec, "step_scale must be a finite value > 0");
  }

  bool needs_period = spec.kind == SynthKind::periodic;
  if (spec.kind == SynthKind::composite) {
    if (spec.segments.empty()) throw Error(ErrorCode::BadSpec, "composite needs at least one segment");
    std::size_t total = 0;
    for (const auto& seg : spec.segments) {
      if (seg.kind == SynthKind::composite) throw Error(ErrorCode::BadSpec, "nested composite segment");
      if (seg.length == 0) throw Error(ErrorCode::BadSpec, "segment lengths must be >= 1");
      if (seg.kind == SynthKind::periodic) needs_period = true;
      total += seg.length;
    }
    if (total != spec.length) {
      throw Error(ErrorCode::BadSpec, "segment lengths sum to " + std::to_string(total) +
                                          ", expected length " + std::to_string(spec.length));
    }
  }
  if (needs_period) {
    if (!spec.period || *spec.period < 1 || *spec.period > spec.length) {
      throw Error(ErrorCode::BadSpec, "period must satisfy 1 <= period <= length");
    }
  }
}

namespace {

using Vec = std::vector<double>;

struct Builder {
  const SynthSpec& spec;
  NormalStream rng;
  Trace trace;
  Vec scratch;

  explicit Builder(const SynthSpec& s) : spec(s), rng(s.seed), scratch(s.dim) {
    trace.dim = s.dim;
    trace.records.reserve(s.length);
  }

  void emit(Vec h) {
    TraceRecord rec;
    rec.step_index = trace.records.size();
    rec.embedding = std::move(h);
    trace.records.push_back(std::move(rec));
  }

  const Vec* last() const { return trace.empty() ? nullptr : &trace.records.back().embedding; }

  void walk(std::size_t length) {
    if (length == 0) return;
    Vec h(spec.dim);
    std::size_t t = 0;
    if (const Vec* prev = last()) {
      h = *prev;
    } else {
      rng.fill_normal(h);
      emit(h);
      t = 1;
    }
    for (; t < length; ++t) {
      rng.fill_normal(scratch);
      for (std::size_t i = 0; i < spec.dim; ++i) h[i] += spec.step_scale * scratch[i];
      emit(h);
    }
  }

  void periodic(std::size_t length) {
    const std::size_t p = *spec.period;
    std::vector<Vec> anchors(p, Vec(spec.dim));
    const Vec* prev = last();
    for (auto& a : anchors) {
      rng.fill_normal(a);
      if (prev) {
        for (std::size_t i = 0; i < spec.dim; ++i) a[i] = (*prev)[i] + spec.step_scale * a[i];
      }
    }
    for (std::size_t t = 0; t < length; ++t) {
      rng.fill_normal(scratch);
      Vec h = anchors[t % p];
      for (std::size_t i = 0; i < spec.dim; ++i) h[i] += spec.noise_sigma * scratch[i];
      emit(std::move(h));
    }
  }
};

}  // namespace

Trace generate(const SynthSpec& spec) {
  validate_spec(spec);
  Builder b(spec);
  switch (spec.kind) {
    case SynthKind::random_walk: b.walk(spec.length); break;
    case SynthKind::periodic: b.periodic(spec.length); break;
    case SynthKind::composite:
      for (const auto& seg : spec.segments) {
        if (seg.kind == SynthKind::random_walk) {
          b.walk(seg.length);
        } else {
          b.periodic(seg.length);
        }
      }
      break;
  }
  return std::move(b.trace);
}

}  // namespace cotloop
