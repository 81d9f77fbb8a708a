#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "cotloop/analysis.hpp"
#include "cotloop/detector.hpp"
#include "cotloop/error.hpp"
#include "test_support.hpp"

using namespace cotloop;
using namespace testing_support;

namespace {

std::vector<DetectorEvent> stream(const Trace& trace, const DetectorConfig& cfg) {
  DetectorSession s(cfg);
  std::vector<DetectorEvent> out;
  for (const auto& r : trace.records) {
    out.push_back(s.push(r.embedding));
    if (s.terminated()) break;
  }
  return out;
}

Trace noisy_cycle(std::uint64_t seed, double noise) {
  SynthSpec spec;
  spec.kind = SynthKind::composite;
  spec.dim = 32;
  spec.length = 160;
  spec.period = 5;
  spec.noise_sigma = noise;
  spec.segments = {{SynthKind::random_walk, 60}, {SynthKind::periodic, 100}};
  spec.seed = seed;
  return generate(spec);
}

}  // namespace

TEST_CASE("batch analysis equals streaming pushes") {
  for (auto mode : {ExitMode::monitor, ExitMode::one_shot}) {
    const DetectorConfig cfg{.exit_mode = mode};
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      for (const Trace& t : {noisy_cycle(seed, 0.1), composite_fixture(seed), random_walk(seed, 120)}) {
        const auto expect = stream(t, cfg);
        CHECK(analyze_trace(t, cfg, Exec::serial) == expect);
        CHECK(analyze_trace(t, cfg, Exec::parallel) == expect);
      }
    }
  }
}

TEST_CASE("serial and parallel kernels are identical") {
  const Trace t = noisy_cycle(9, 0.2);
  const DetectorConfig cfg;
  const auto ds = trajectory_dynamics(t, Exec::serial);
  const auto dp = trajectory_dynamics(t, Exec::parallel);
  CHECK(ds == dp);
  CHECK(window_estimates(ds, cfg, Exec::serial, true) == window_estimates(dp, cfg, Exec::parallel, true));

  const std::vector<Trace> batch{noisy_cycle(1, 0.1), random_walk(2, 90), composite_fixture(3)};
  CHECK(analyze_batch(batch, cfg, Exec::serial) == analyze_batch(batch, cfg, Exec::parallel));
}

TEST_CASE("short traces") {
  const DetectorConfig cfg;
  CHECK(analyze_trace(Trace{}, cfg).empty());
  const Trace one = random_walk(1, 1);
  const auto ev = analyze_trace(one, cfg);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].kind == EventKind::warmup);
  CHECK_FALSE(ev[0].dynamics);
  CHECK(window_estimates({}, cfg).empty());
}

TEST_CASE("errors surface like the streaming path") {
  Trace t = random_walk(3, 60);
  t.records[20].embedding.assign(t.dim, 0.0);
  for (auto exec : {Exec::serial, Exec::parallel}) {
    try {
      analyze_trace(t, DetectorConfig{}, exec);
      FAIL("expected ZeroNormVector");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ZeroNormVector);
      CHECK(std::string(e.what()).find("transition 19") != std::string::npos);
    }
  }
  Trace bad = random_walk(3, 10);
  bad.records[4].embedding.pop_back();
  CHECK_THROWS_AS(analyze_trace(bad, DetectorConfig{}), Error);
  CHECK_THROWS_AS(analyze_trace(random_walk(1, 40), DetectorConfig{.window = 3}), Error);
}

TEST_CASE("first_detection agrees with the event stream") {
  const DetectorConfig cfg{.exit_mode = ExitMode::monitor};
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const Trace t = noisy_cycle(seed, 0.15);
    const auto dyn = trajectory_dynamics(t);
    const auto est = window_estimates(dyn, cfg);
    CHECK(first_detection(est, cfg) == first_detection(analyze_trace(t, cfg)));
  }
}

TEST_CASE("sweep") {
  const Trace t = noisy_cycle(4, 0.1);
  const std::vector<double> rho{0.1, 0.7, 0.95};
  const std::vector<int> ms{1, 8};
  const auto cells = sweep(t, DetectorConfig{}, rho, ms, Exec::parallel);
  REQUIRE(cells.size() == 6);
  CHECK(cells == sweep(t, DetectorConfig{}, rho, ms, Exec::serial));

  for (const auto& c : cells) {
    DetectorConfig cfg{.rho_star = c.rho_star, .stability = c.stability, .exit_mode = ExitMode::monitor};
    const auto expect = first_detection(analyze_trace(t, cfg));
    CHECK(c.detection_step == expect);
    CHECK(c.length == t.size());
    CHECK(c.steps_saved == (expect ? t.size() - *expect - 1 : 0));
  }
  // Row-major in rho_star.
  CHECK(cells[0].rho_star == 0.1);
  CHECK(cells[1].stability == 8);
  CHECK(cells[2].rho_star == 0.7);

  CHECK_THROWS_AS(sweep(t, DetectorConfig{}, {}, ms), Error);
  CHECK_THROWS_AS(sweep(t, DetectorConfig{}, rho, {}), Error);
  const std::vector<double> bad_rho{1.5};
  CHECK_THROWS_AS(sweep(t, DetectorConfig{}, bad_rho, ms), Error);
}
