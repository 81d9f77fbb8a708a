#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "cotloop/detector.hpp"
#include "cotloop/error.hpp"
#include "test_support.hpp"

using namespace cotloop;
using namespace testing_support;

namespace {

std::vector<DetectorEvent> push_all(DetectorSession& s, const Trace& trace) {
  std::vector<DetectorEvent> out;
  for (const auto& rec : trace.records) {
    out.push_back(s.push(rec.embedding));
    if (s.terminated()) break;
  }
  return out;
}

std::size_t count(const std::vector<DetectorEvent>& evs, EventKind k) {
  std::size_t n = 0;
  for (const auto& e : evs) n += e.kind == k;
  return n;
}

// Event grammar: warmup* (normal | cycle_enter | cycle_exit | early_exit)*
bool well_formed(const std::vector<DetectorEvent>& evs) {
  bool past_warmup = false;
  for (const auto& e : evs) {
    if (e.kind == EventKind::warmup) {
      if (past_warmup) return false;
    } else {
      past_warmup = true;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("warmup lasts W + 1 pushes") {
  const DetectorConfig cfg;
  DetectorSession s(cfg);
  const Trace trace = random_walk(5, 40);
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const auto ev = s.push(trace.records[k].embedding);
    CHECK(ev.step_index == k);
    CHECK(s.window().size() == std::min<std::size_t>(k, 32));
    if (k < 32) {
      CHECK(ev.kind == EventKind::warmup);
      CHECK_FALSE(ev.estimate);
      CHECK(ev.dynamics.has_value() == (k > 0));
    } else {
      CHECK(ev.kind != EventKind::warmup);
      CHECK(ev.estimate);
      CHECK(ev.dynamics);
    }
  }
}

TEST_CASE("composite fixture exits exactly where the offline oracle says") {
  const Trace trace = composite_fixture();
  const auto expect = oracle::replay(embeddings_of(trace), 0.7, 8, 32, 8, true);
  // Frozen from the oracle replay of seed 7.
  REQUIRE(expect.size() == 76);
  REQUIRE(expect.back() == oracle::Kind::early_exit);

  DetectorSession s(DetectorConfig{});
  const auto events = push_all(s, trace);
  CHECK(kinds_of(events) == expect);
  CHECK(count(events, EventKind::early_exit) == 1);
  CHECK(events.back().step_index == 75);
  CHECK(events.back().estimate->best_lag == 4);
  CHECK(events.back().estimate->strength >= 1.0 - 1e-9);
  CHECK(s.terminated());
  CHECK_THROWS_WITH_AS(s.push(trace.records[76].embedding), doctest::Contains("SessionTerminated"), Error);
}

TEST_CASE("pure random walks never exit") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Trace trace = random_walk(seed);
    DetectorSession s(DetectorConfig{});
    const auto events = push_all(s, trace);
    CHECK(events.size() == 500);
    CHECK(count(events, EventKind::early_exit) == 0);
    CHECK_FALSE(oracle::first_enter(oracle::replay(embeddings_of(trace), 0.7, 8, 32, 8, true)));
  }
}

TEST_CASE("monitor mode matches the oracle and alternates enter/exit") {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    SynthSpec spec;
    spec.kind = SynthKind::composite;
    spec.dim = 16;
    spec.length = 200;
    spec.period = 3;
    spec.noise_sigma = 0.05;
    spec.segments = {{SynthKind::random_walk, 50}, {SynthKind::periodic, 60}, {SynthKind::random_walk, 90}};
    spec.seed = seed;
    const Trace trace = generate(spec);

    DetectorSession s(DetectorConfig{.exit_mode = ExitMode::monitor});
    const auto events = push_all(s, trace);
    CHECK(events.size() == trace.size());
    CHECK(kinds_of(events) == oracle::replay(embeddings_of(trace), 0.7, 8, 32, 8, false));
    CHECK(well_formed(events));
    CHECK(count(events, EventKind::early_exit) == 0);
    bool in_cycle = false;
    for (const auto& e : events) {
      if (e.kind == EventKind::cycle_enter) {
        CHECK_FALSE(in_cycle);
        in_cycle = true;
      }
      if (e.kind == EventKind::cycle_exit) {
        CHECK(in_cycle);
        in_cycle = false;
      }
    }
  }
}

TEST_CASE("reset") {
  const Trace trace = random_walk(8, 100);
  DetectorSession s(DetectorConfig{.exit_mode = ExitMode::monitor});

  SUBCASE("replay after reset is identical") {
    const auto first = push_all(s, trace);
    s.reset();
    CHECK(s.steps_seen() == 0);
    CHECK_FALSE(s.dim());
    CHECK(push_all(s, trace) == first);
  }
  SUBCASE("reset on a fresh session is a no-op") {
    DetectorSession fresh(DetectorConfig{.exit_mode = ExitMode::monitor});
    fresh.reset();
    CHECK(fresh.steps_seen() == 0);
    CHECK(fresh.controller() == ControllerState{});
    CHECK(push_all(fresh, trace) == push_all(s, trace));
  }
  SUBCASE("reset after early exit accepts pushes again") {
    DetectorSession one(DetectorConfig{});
    const Trace fixture = composite_fixture();
    push_all(one, fixture);
    REQUIRE(one.terminated());
    one.reset();
    CHECK_FALSE(one.terminated());
    CHECK_FALSE(one.controller().exited);
    CHECK_NOTHROW(one.push(fixture.records[0].embedding));
  }
  SUBCASE("reset unlocks the dimension") {
    s.push(std::vector<double>{1.0, 2.0});
    s.reset();
    CHECK_NOTHROW(s.push(std::vector<double>{1.0, 2.0, 3.0}));
  }
}

TEST_CASE("global positive scaling leaves events unchanged") {
  const Trace base = composite_fixture(11, 60);
  DetectorSession ref(DetectorConfig{.exit_mode = ExitMode::monitor});
  const auto expect = kinds_of(push_all(ref, base));
  for (double alpha : {1e-3, 1.0, 1e3}) {
    Trace scaled = base;
    for (auto& r : scaled.records) {
      for (auto& v : r.embedding) v *= alpha;
    }
    DetectorSession s(DetectorConfig{.exit_mode = ExitMode::monitor});
    CHECK(kinds_of(push_all(s, scaled)) == expect);
  }
}

TEST_CASE("float and double input agree after widening") {
  const Trace trace = random_walk(2, 50);
  DetectorSession a(DetectorConfig{.exit_mode = ExitMode::monitor});
  DetectorSession b(DetectorConfig{.exit_mode = ExitMode::monitor});
  for (const auto& rec : trace.records) {
    std::vector<float> f(rec.embedding.begin(), rec.embedding.end());
    std::vector<double> widened(f.begin(), f.end());
    CHECK(a.push(std::span<const float>(f)) == b.push(widened));
  }
}

TEST_CASE("diagnostics attach per-lag correlations") {
  DetectorSession s(DetectorConfig{.exit_mode = ExitMode::monitor});
  s.set_diagnostics(true);
  const Trace trace = random_walk(4, 40);
  DetectorEvent last;
  for (const auto& r : trace.records) last = s.push(r.embedding);
  REQUIRE(last.estimate);
  REQUIRE(last.estimate->per_lag);
  CHECK(last.estimate->per_lag->size() == 8);
  CHECK((*last.estimate->per_lag)[static_cast<std::size_t>(last.estimate->best_lag - 1)].r ==
        last.estimate->strength);
}

TEST_CASE("input errors") {
  DetectorSession s(DetectorConfig{});
  CHECK_THROWS_AS(s.push(std::vector<double>{}), Error);
  s.push(std::vector<double>{1.0, 2.0, 3.0});
  try {
    s.push(std::vector<double>{1.0, 2.0});
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
    CHECK(std::string(e.what()).find("expected 3") != std::string::npos);
  }
  try {
    s.push(std::vector<double>{1.0, std::numeric_limits<double>::quiet_NaN(), 3.0});
    FAIL("expected NonFiniteInput");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteInput);
  }
  try {
    s.push(std::vector<double>{0.0, 0.0, 0.0});
    FAIL("expected ZeroNormVector");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroNormVector);
  }
  // Rejected pushes leave the session untouched.
  CHECK(s.steps_seen() == 1);

  DetectorSession z(DetectorConfig{});
  CHECK_THROWS_AS(z.push(std::vector<double>{0.0, 0.0}), Error);
  CHECK_FALSE(z.dim());

  CHECK_THROWS_AS(DetectorSession(DetectorConfig{.window = 8}), Error);
}
