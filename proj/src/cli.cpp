#include "cotloop/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cotloop/analysis.hpp"
#include "cotloop/config.hpp"
#include "cotloop/detector.hpp"
#include "cotloop/synth.hpp"
#include "cotloop/trace_io.hpp"

namespace cotloop::cli {

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::WindowTooSmall:
    case ErrorCode::BadThreshold:
    case ErrorCode::ZeroStability:
    case ErrorCode::BadConfig:
    case ErrorCode::BadSpec:
      return kExitBadConfig;
    case ErrorCode::IoError:
      return kExitIo;
    case ErrorCode::DimensionMismatch:
    case ErrorCode::ZeroNormVector:
    case ErrorCode::NonFiniteInput:
    case ErrorCode::WindowNotFull:
    case ErrorCode::BadLag:
    case ErrorCode::SessionTerminated:
    case ErrorCode::MalformedHeader:
    case ErrorCode::MalformedRecord:
    case ErrorCode::TruncatedFile:
    case ErrorCode::NonFiniteValue:
    case ErrorCode::ProtocolError:
      return kExitBadInput;
  }
  return kExitBadInput;
}

std::string event_line(const DetectorEvent& event) {
  nlohmann::ordered_json j;
  j["step"] = event.step_index;
  j["event"] = std::string(to_string(event.kind));
  if (event.estimate) {
    j["rho"] = event.estimate->strength;
    j["ell"] = event.estimate->best_lag;
  } else {
    j["rho"] = nullptr;
    j["ell"] = nullptr;
  }
  return j.dump();
}

namespace {

// Detector settings shared by analyze, stream and sweep. Flags override the
// config file, which overrides the built-in defaults.
struct ConfigFlags {
  std::string config_path;
  std::optional<double> rho_star;
  std::optional<int> p_max;
  std::optional<int> window;
  std::optional<int> stability;
  std::optional<std::string> entry_rule;
  std::optional<std::string> mode;

  void attach(CLI::App& app, bool with_mode) {
    app.add_option("--config", config_path, "key = value config file");
    app.add_option("--rho-star", rho_star, "correlation threshold (default 0.7)");
    app.add_option("--p-max", p_max, "largest candidate period (default 8)");
    app.add_option("--window", window, "window length in transitions (default 32)");
    app.add_option("--stability", stability, "consecutive estimates to enter a cycle (default 8)");
    app.add_option("--entry-rule", entry_rule, "band | anchored | exact (default band)");
    if (with_mode) app.add_option("--mode", mode, "one_shot | monitor");
  }

  DetectorConfig resolve(std::optional<ExitMode> default_mode) const {
    DetectorConfig cfg;
    if (default_mode) cfg.exit_mode = *default_mode;
    if (!config_path.empty()) cfg = load_config_file(config_path, cfg);
    if (rho_star) cfg.rho_star = *rho_star;
    if (p_max) cfg.p_max = *p_max;
    if (window) cfg.window = *window;
    if (stability) cfg.stability = *stability;
    if (entry_rule) cfg.entry_rule = parse_entry_rule(*entry_rule);
    if (mode) cfg.exit_mode = parse_exit_mode(*mode);
    validate_config(cfg);
    return cfg;
  }
};

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> out;
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    std::string_view item = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item.empty()) continue;
    T v{};
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || ptr != item.data() + item.size()) {
      throw Error(ErrorCode::BadConfig, std::string("bad ") + what + " value '" + std::string(item) + "'");
    }
    out.push_back(v);
  }
  return out;
}

// ---- analyze ---------------------------------------------------------------

struct AnalyzeArgs {
  std::string input;
  std::string format = "auto";
  std::string csv_path;
  std::string events_path;
  ConfigFlags flags;
};

void write_csv(std::ostream& os, const std::vector<DetectorEvent>& events) {
  os << "step,delta_mag,cos_ang,z,best_lag,rho,state,event\n";
  Phase phase = Phase::normal;
  for (const auto& ev : events) {
    if (ev.kind == EventKind::cycle_enter || ev.kind == EventKind::early_exit) phase = Phase::cycle;
    if (ev.kind == EventKind::cycle_exit) phase = Phase::normal;
    os << ev.step_index << ',';
    if (ev.dynamics) {
      os << fmt_double(ev.dynamics->delta_mag) << ',' << fmt_double(ev.dynamics->cos_ang) << ','
         << fmt_double(ev.dynamics->z) << ',';
    } else {
      os << ",,,";
    }
    if (ev.estimate) {
      os << ev.estimate->best_lag << ',' << fmt_double(ev.estimate->strength) << ',';
    } else {
      os << ",,";
    }
    os << to_string(phase) << ',' << to_string(ev.kind) << '\n';
  }
}

int cmd_analyze(const AnalyzeArgs& args, std::ostream& out) {
  const DetectorConfig cfg = args.flags.resolve(ExitMode::monitor);
  const TraceFormat format =
      args.format == "auto" ? detect_trace_format(args.input) : parse_trace_format(args.format);
  const Trace trace = read_trace(args.input, format);
  const auto events = analyze_trace(trace, cfg);

  std::map<EventKind, std::size_t> counts;
  for (const auto& ev : events) ++counts[ev.kind];
  const auto detected = first_detection(events);
  std::optional<std::uint64_t> early;
  for (const auto& ev : events) {
    if (ev.kind == EventKind::early_exit) early = ev.step_index;
  }

  auto opt = [](const std::optional<std::uint64_t>& v) {
    return v ? std::to_string(*v) : std::string("none");
  };
  out << "trace: " << args.input << '\n'
      << "mode: " << to_string(cfg.exit_mode) << '\n'
      << "steps: " << trace.size() << '\n'
      << "steps_processed: " << events.size() << '\n';
  for (EventKind k : {EventKind::warmup, EventKind::normal, EventKind::cycle_enter,
                      EventKind::cycle_exit, EventKind::early_exit}) {
    out << to_string(k) << ": " << counts[k] << '\n';
  }
  out << "first_detection: " << opt(detected) << '\n' << "early_exit_step: " << opt(early) << '\n';

  if (!args.csv_path.empty()) {
    std::ofstream csv(args.csv_path, std::ios::trunc);
    if (!csv) throw Error(ErrorCode::IoError, "cannot write " + args.csv_path);
    write_csv(csv, events);
  }
  if (!args.events_path.empty()) {
    std::ofstream ev(args.events_path, std::ios::trunc);
    if (!ev) throw Error(ErrorCode::IoError, "cannot write " + args.events_path);
    for (const auto& e : events) ev << event_line(e) << '\n';
  }
  return kExitOk;
}

// ---- stream ----------------------------------------------------------------

int emit(std::ostream& out, const DetectorEvent& ev) {
  out << event_line(ev) << '\n';
  out.flush();
  return ev.kind == EventKind::early_exit ? kExitEarlyExit : kExitOk;
}

int stream_jsonl(std::istream& in, std::ostream& out, DetectorSession& session) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> dim;
  std::uint64_t expected_step = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!dim) {
      nlohmann::json hs;
      try {
        hs = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ProtocolError, "line " + std::to_string(line_no) + ": bad handshake: " + e.what());
      }
      if (!hs.is_object() || !hs.contains("dim") || !hs["dim"].is_number_unsigned() ||
          hs["dim"].get<std::size_t>() == 0) {
        throw Error(ErrorCode::ProtocolError,
                    "line " + std::to_string(line_no) + ": handshake must be {\"dim\":<positive int>}");
      }
      dim = hs["dim"].get<std::size_t>();
      continue;
    }

    TraceRecord rec;
    try {
      rec = parse_jsonl_record(line, expected_step);
    } catch (const Error& e) {
      throw Error(ErrorCode::ProtocolError, "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (rec.step_index != expected_step) {
      throw Error(ErrorCode::ProtocolError, "line " + std::to_string(line_no) + ": expected step " +
                                                std::to_string(expected_step) + ", got " +
                                                std::to_string(rec.step_index));
    }
    if (rec.embedding.size() != *dim) {
      throw Error(ErrorCode::DimensionMismatch, "step " + std::to_string(rec.step_index) +
                                                    ": expected dim " + std::to_string(*dim) +
                                                    ", got " + std::to_string(rec.embedding.size()));
    }
    ++expected_step;
    if (emit(out, session.push(rec.embedding)) == kExitEarlyExit) return kExitEarlyExit;
  }
  return kExitOk;
}

int stream_binary(std::istream& in, std::ostream& out, DetectorSession& session) {
  BinaryTraceReader reader(in);
  if (reader.header().dim == 0) {
    throw Error(ErrorCode::ProtocolError, "stream header declares dimension 0");
  }
  const std::uint32_t limit = reader.header().count;
  while (limit == 0 || reader.records_read() < limit) {
    auto rec = reader.next();
    if (!rec) {
      if (limit != 0) {
        throw Error(ErrorCode::TruncatedFile, "stream ended after " + std::to_string(reader.records_read()) +
                                                  " of " + std::to_string(limit) + " records");
      }
      break;
    }
    if (emit(out, session.push(rec->embedding)) == kExitEarlyExit) return kExitEarlyExit;
  }
  return kExitOk;
}

int cmd_stream(const std::string& format, const ConfigFlags& flags, std::istream& in, std::ostream& out) {
  const DetectorConfig cfg = flags.resolve(std::nullopt);
  DetectorSession session(cfg);
  return parse_trace_format(format) == TraceFormat::binary ? stream_binary(in, out, session)
                                                          : stream_jsonl(in, out, session);
}

// ---- synth -----------------------------------------------------------------

struct SynthArgs {
  std::string kind = "random_walk";
  std::size_t dim = 8;
  std::optional<std::size_t> length;
  std::optional<long long> period;
  double noise = 0.0;
  double step_scale = 1.0;
  std::string segments;
  std::uint64_t seed = 0;
  std::string out_path = "-";
  std::string format = "jsonl";
  std::string dtype = "f32";
};

int cmd_synth(const SynthArgs& args, std::ostream& out) {
  SynthSpec spec;
  spec.kind = parse_synth_kind(args.kind);
  spec.dim = args.dim;
  spec.noise_sigma = args.noise;
  spec.step_scale = args.step_scale;
  spec.seed = args.seed;
  if (args.period) {
    if (*args.period < 1) throw Error(ErrorCode::BadSpec, "period must be >= 1");
    spec.period = static_cast<std::size_t>(*args.period);
  }
  if (!args.segments.empty()) spec.segments = parse_segments(args.segments);
  if (args.length) {
    spec.length = *args.length;
  } else if (spec.kind == SynthKind::composite) {
    spec.length = 0;
    for (const auto& s : spec.segments) spec.length += s.length;
  } else {
    throw Error(ErrorCode::BadSpec, "--length is required");
  }

  const Trace trace = generate(spec);
  const TraceFormat format = parse_trace_format(args.format);
  BinaryDtype dtype;
  if (args.dtype == "f32") {
    dtype = BinaryDtype::f32;
  } else if (args.dtype == "f64") {
    dtype = BinaryDtype::f64;
  } else {
    throw Error(ErrorCode::BadSpec, "unknown dtype '" + args.dtype + "'");
  }

  if (args.out_path == "-") {
    if (format == TraceFormat::binary) {
      write_trace_binary(out, trace, dtype);
    } else {
      write_trace_jsonl(out, trace);
    }
  } else {
    write_trace(args.out_path, trace, format, dtype);
  }
  return kExitOk;
}

// ---- sweep -----------------------------------------------------------------

struct SweepArgs {
  std::vector<std::string> inputs;
  std::string rho_grid = "0.5,0.6,0.7,0.8,0.9";
  std::string stability_grid = "1,2,4,8,12,16";
  ConfigFlags flags;
};

int cmd_sweep(const SweepArgs& args, std::ostream& out) {
  const auto rho = parse_list<double>(args.rho_grid, "rho grid");
  const auto stab = parse_list<int>(args.stability_grid, "stability grid");
  if (rho.empty() || stab.empty()) throw Error(ErrorCode::BadConfig, "sweep grid is empty");
  DetectorConfig base = args.flags.resolve(ExitMode::monitor);

  std::vector<Trace> traces;
  traces.reserve(args.inputs.size());
  for (const auto& path : args.inputs) traces.push_back(read_trace(path));

  out << "trace,rho_star,stability,detection_step,steps_saved,length\n";
  for (std::size_t i = 0; i < traces.size(); ++i) {
    for (const auto& cell : sweep(traces[i], base, rho, stab)) {
      out << args.inputs[i] << ',' << fmt_double(cell.rho_star) << ',' << cell.stability << ','
          << (cell.detection_step ? std::to_string(*cell.detection_step) : "none") << ','
          << cell.steps_saved << ',' << cell.length << '\n';
    }
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Detects cyclic redundancy in chain-of-thought embedding trajectories", "cotloop"};
  app.require_subcommand(1);

  AnalyzeArgs analyze;
  auto* a = app.add_subcommand("analyze", "Run the detector over a trace file and summarize events");
  a->add_option("input", analyze.input, "trace file (JSONL or binary)")->required();
  a->add_option("--format", analyze.format, "auto | jsonl | binary");
  a->add_option("--csv", analyze.csv_path, "write per-step diagnostics CSV");
  a->add_option("--events", analyze.events_path, "write per-step event lines (stream output format)");
  analyze.flags.attach(*a, true);

  std::string stream_format = "jsonl";
  ConfigFlags stream_flags;
  auto* s = app.add_subcommand("stream", "Detect on frames read from stdin, one event line per step");
  s->add_option("--format", stream_format, "jsonl | binary");
  stream_flags.attach(*s, true);

  SynthArgs synth;
  auto* g = app.add_subcommand("synth", "Generate a synthetic trajectory");
  g->add_option("--kind", synth.kind, "random_walk | periodic | composite");
  g->add_option("--dim", synth.dim, "embedding dimension");
  g->add_option("--length", synth.length, "number of steps");
  g->add_option("--period", synth.period, "cycle length for periodic segments");
  g->add_option("--noise", synth.noise, "noise sigma for periodic segments");
  g->add_option("--step-scale", synth.step_scale, "random walk step size");
  g->add_option("--segments", synth.segments, "composite segments, e.g. walk:40,periodic:24");
  g->add_option("--seed", synth.seed, "random seed")->required();
  g->add_option("--out", synth.out_path, "output path, - for stdout");
  g->add_option("--format", synth.format, "jsonl | binary");
  g->add_option("--dtype", synth.dtype, "binary value type: f32 | f64");

  SweepArgs sweep_args;
  auto* w = app.add_subcommand("sweep", "First-detection step over a rho_star x stability grid");
  w->add_option("inputs", sweep_args.inputs, "trace files")->required();
  w->add_option("--rho-grid", sweep_args.rho_grid, "comma-separated rho_star values");
  w->add_option("--stability-grid", sweep_args.stability_grid, "comma-separated stability values");
  sweep_args.flags.attach(*w, false);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadConfig;
  }

  try {
    if (a->parsed()) return cmd_analyze(analyze, out);
    if (s->parsed()) return cmd_stream(stream_format, stream_flags, in, out);
    if (g->parsed()) return cmd_synth(synth, out);
    if (w->parsed()) return cmd_sweep(sweep_args, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitBadConfig;
}

}  // namespace cotloop::cli
