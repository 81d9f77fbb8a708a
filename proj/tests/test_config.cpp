#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "cotloop/config.hpp"

using namespace cotloop;

namespace {

std::optional<ErrorCode> code_of(const DetectorConfig& cfg) {
  if (auto e = check_config(cfg)) return e->code();
  return std::nullopt;
}

DetectorConfig make(double rho, int p, int w, int m) {
  return DetectorConfig{.rho_star = rho, .p_max = p, .window = w, .stability = m};
}

}  // namespace

TEST_CASE("defaults match the reference hyperparameters") {
  const DetectorConfig cfg;
  CHECK(cfg.rho_star == 0.7);
  CHECK(cfg.p_max == 8);
  CHECK(cfg.window == 32);
  CHECK(cfg.stability == 8);
  CHECK(cfg.entry_rule == EntryRule::band);
  CHECK_FALSE(check_config(cfg));
}

TEST_CASE("validate_config examples") {
  CHECK_FALSE(code_of(make(0.7, 8, 32, 8)));
  CHECK(code_of(make(0.7, 8, 8, 8)) == ErrorCode::WindowTooSmall);
  CHECK(code_of(make(1.5, 8, 32, 8)) == ErrorCode::BadThreshold);
  CHECK(code_of(make(0.7, 8, 32, 0)) == ErrorCode::ZeroStability);
  CHECK(code_of(make(0.0, 8, 32, 8)) == ErrorCode::BadThreshold);
  CHECK_FALSE(code_of(make(1.0, 8, 32, 8)));
  CHECK(code_of(make(0.7, 8, 9, 8)) == ErrorCode::WindowTooSmall);
  CHECK_FALSE(code_of(make(0.7, 8, 10, 8)));
  CHECK_THROWS_AS(validate_config(make(0.7, 8, 8, 8)), Error);
}

TEST_CASE("first violated constraint is reported") {
  CHECK(code_of(make(2.0, 8, 8, 0)) == ErrorCode::WindowTooSmall);
  CHECK(code_of(make(2.0, 8, 32, 0)) == ErrorCode::BadThreshold);
}

TEST_CASE("accepted configs leave at least two samples per segment") {
  for (int p = 1; p <= 12; ++p) {
    for (int w = 1; w <= 40; ++w) {
      if (check_config(make(0.7, p, w, 1))) continue;
      for (int lag = 1; lag <= p; ++lag) CHECK(w - lag >= 2);
    }
  }
}

TEST_CASE("config text parsing") {
  DetectorConfig cfg;
  apply_config_text(cfg, R"(
# detector
rho_star = 0.55
p_max = 6
window = 24   # trailing comment
stability = 4
exit_mode = "monitor"
entry_rule = 'exact'
model = "some-adapter-only-key"
[adapter]
max_new_tokens = 8192
)");
  CHECK(cfg.rho_star == 0.55);
  CHECK(cfg.p_max == 6);
  CHECK(cfg.window == 24);
  CHECK(cfg.stability == 4);
  CHECK(cfg.exit_mode == ExitMode::monitor);
  CHECK(cfg.entry_rule == EntryRule::exact);
}

TEST_CASE("config text errors") {
  DetectorConfig cfg;
  CHECK_THROWS_WITH_AS(apply_config_text(cfg, "window = abc"), doctest::Contains("line 1"), Error);
  CHECK_THROWS_AS(apply_config_text(cfg, "just words"), Error);
  CHECK_THROWS_AS(apply_config_text(cfg, "exit_mode = sometimes"), Error);
  CHECK_THROWS_AS(apply_config_text(cfg, "p_max = 3.5"), Error);
}

TEST_CASE("config file round trip") {
  const auto path = std::filesystem::temp_directory_path() / "cotloop_test_config.toml";
  {
    std::ofstream out(path);
    out << "rho_star = 0.9\nstability = 2\n";
  }
  const DetectorConfig cfg = load_config_file(path, DetectorConfig{.window = 20});
  CHECK(cfg.rho_star == 0.9);
  CHECK(cfg.stability == 2);
  CHECK(cfg.window == 20);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_config_file(path), Error);
}
