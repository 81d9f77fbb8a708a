#include "cotloop/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cotloop {

std::optional<Error> check_config(const DetectorConfig& cfg) {
  if (cfg.p_max < 1) {
    return Error(ErrorCode::BadConfig, "p_max must be >= 1, got " + std::to_string(cfg.p_max));
  }
  if (cfg.window < cfg.p_max + 2) {
    return Error(ErrorCode::WindowTooSmall, "window " + std::to_string(cfg.window) +
                                                " must be >= p_max + 2 = " +
                                                std::to_string(cfg.p_max + 2));
  }
  if (!(cfg.rho_star > 0.0 && cfg.rho_star <= 1.0)) {
    std::ostringstream os;
    os << "rho_star must lie in (0, 1], got " << cfg.rho_star;
    return Error(ErrorCode::BadThreshold, os.str());
  }
  if (cfg.stability < 1) {
    return Error(ErrorCode::ZeroStability,
                 "stability must be >= 1, got " + std::to_string(cfg.stability));
  }
  return std::nullopt;
}

void validate_config(const DetectorConfig& cfg) {
  if (auto err = check_config(cfg)) throw *err;
}

std::string_view to_string(ExitMode mode) noexcept {
  return mode == ExitMode::one_shot ? "one_shot" : "monitor";
}

std::string_view to_string(EntryRule rule) noexcept {
  switch (rule) {
    case EntryRule::band: return "band";
    case EntryRule::anchored: return "anchored";
    case EntryRule::exact: return "exact";
  }
  return "band";
}

ExitMode parse_exit_mode(std::string_view text) {
  if (text == "one_shot") return ExitMode::one_shot;
  if (text == "monitor") return ExitMode::monitor;
  throw Error(ErrorCode::BadConfig, "unknown exit_mode '" + std::string(text) + "'");
}

EntryRule parse_entry_rule(std::string_view text) {
  if (text == "band") return EntryRule::band;
  if (text == "anchored") return EntryRule::anchored;
  if (text == "exact") return EntryRule::exact;
  throw Error(ErrorCode::BadConfig, "unknown entry_rule '" + std::string(text) + "'");
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string_view unquote(std::string_view s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

template <typename T>
T parse_number(std::string_view key, std::string_view value, int line_no) {
  T out{};
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw Error(ErrorCode::BadConfig, "line " + std::to_string(line_no) + ": bad value '" +
                                          std::string(value) + "' for " + std::string(key));
  }
  return out;
}

}  // namespace

void apply_config_text(DetectorConfig& cfg, std::string_view text) {
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::BadConfig,
                  "line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = unquote(trim(line.substr(eq + 1)));

    if (key == "rho_star") {
      cfg.rho_star = parse_number<double>(key, value, line_no);
    } else if (key == "p_max") {
      cfg.p_max = parse_number<int>(key, value, line_no);
    } else if (key == "window") {
      cfg.window = parse_number<int>(key, value, line_no);
    } else if (key == "stability") {
      cfg.stability = parse_number<int>(key, value, line_no);
    } else if (key == "exit_mode") {
      cfg.exit_mode = parse_exit_mode(value);
    } else if (key == "entry_rule") {
      cfg.entry_rule = parse_entry_rule(value);
    }
  }
}

DetectorConfig load_config_file(const std::filesystem::path& path, DetectorConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  apply_config_text(base, buf.str());
  return base;
}

}  // namespace cotloop
