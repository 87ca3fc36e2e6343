// grainforce command-line front end.
//
//   grainforce render     --count 3 --duration-ms 10 --mode sine --out stim/
//   grainforce simulate   --force stim/force.csv --device ct --out sim/
//   grainforce experiment --interface all --out grid/
//   grainforce align      stim/audio.wav stim/force.wav
//   grainforce stream     --audio stim/audio.wav --force stim/force.wav --sink loopback

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "grainforce/grainforce.hpp"
#include "grainforce/tcp_sink.hpp"

namespace gf = grainforce;
namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::string> seed;
};

gf::EngineConfig load(const GlobalOptions& g) {
  return g.config_path.empty() ? gf::EngineConfig{} : gf::load_config(g.config_path);
}

struct RenderArgs {
  std::string schedule_path;
  std::size_t count = 3;
  double interval_s = gf::kGrainOnsetIntervalS;
  double first_onset_s = 0.0;
  double duration_ms = 10.0;
  double amplitude_n = 1.00;
  std::string mode = "constant";
  double total_s = -1.0;
};

int run_render(const GlobalOptions& g, const RenderArgs& a) {
  const auto cfg = load(g);
  gf::GrainSchedule schedule;
  if (!a.schedule_path.empty()) {
    std::ifstream in(a.schedule_path);
    if (!in) throw gf::Error(gf::ErrorCode::IoError, "cannot open " + a.schedule_path);
    schedule = gf::read_schedule(in);
  } else {
    gf::GrainSpec grain;
    grain.duration_ms = a.duration_ms;
    grain.force_amplitude_n = a.amplitude_n;
    grain.audio_amplitude = cfg.render.audio_amplitude;
    grain.force_mode = a.mode == "sine" ? gf::ForceMode::Sine : gf::ForceMode::Constant;
    schedule = gf::make_periodic_schedule(a.count, a.interval_s, grain, gf::kBaselineForceN,
                                          a.first_onset_s, "cli");
  }
  double total = a.total_s;
  if (total < 0.0) {
    total = schedule.grains.empty() ? a.interval_s : schedule.grains.back().onset_s + a.interval_s;
  }
  const auto emission = gf::compensate(schedule, cfg.latency);
  const auto audio = gf::render_tracks(emission.audio, cfg.render.audio_rate_hz, cfg.render.force_rate_hz, total);
  const auto force = gf::render_tracks(emission.force, cfg.render.audio_rate_hz, cfg.render.force_rate_hz, total);

  const fs::path out = g.out_dir;
  fs::create_directories(out);
  gf::write_wav(out / "audio.wav", audio.audio);
  gf::write_wav(out / "force.wav", force.force);
  gf::write_force_csv(out / "force.csv", force.force);
  std::ofstream(out / "schedule.jsonl") << gf::schedule_to_jsonl(schedule);
  std::cout << "grains=" << schedule.grains.size() << " audio_samples=" << audio.audio.size()
            << " force_samples=" << force.force.size() << " out=" << out.string() << "\n";
  return 0;
}

int run_simulate(const GlobalOptions& g, const std::string& force_path, const std::string& device) {
  const auto cfg = load(g);
  const auto force = gf::read_track(force_path);
  gf::DeviceTrace trace;
  if (device == "ct") {
    trace = gf::simulate_ct(force, cfg.ct);
    std::cout << "peak_displacement_m=" << gf::format_double(gf::peak_displacement(trace)) << "\n";
  } else {
    trace = gf::simulate_ksfr(force, cfg.ksfr);
    std::cout << "peak_velocity_deficit_m_per_s="
              << gf::format_double(gf::peak_velocity_deficit(trace, cfg.ksfr.intended_velocity_m_per_s))
              << "\n";
  }
  const fs::path out = g.out_dir;
  fs::create_directories(out);
  gf::write_trace_csv(out / "trace.csv", trace);
  return 0;
}

int run_experiment(const GlobalOptions& g, const std::string& iface) {
  gf::GridOptions opts;
  if (iface != "all") opts.only = gf::parse_interface(iface);
  opts.out_dir = fs::path(g.out_dir);
  const auto grid = gf::run_grid(load(g), opts);
  std::cout << gf::summary_table(grid);
  return grid.failures == 0 ? 0 : 2;
}

int run_align(const GlobalOptions& g, const std::string& audio_path, const std::string& force_path,
              std::optional<double> tolerance) {
  const auto cfg = load(g);
  const auto audio = gf::read_track(audio_path);
  const auto force = gf::read_track(force_path);
  const double lag = gf::measure_alignment(audio, force, cfg.alignment);
  char line[64];
  std::snprintf(line, sizeof line, "lag_ms=%.4f", lag);
  std::cout << line << "\n";
  return std::abs(lag) <= tolerance.value_or(cfg.latency.tolerance_ms) ? 0 : 1;
}

struct StreamArgs {
  std::string audio_path;
  std::string force_path;
  std::optional<double> frame_ms;
  std::string sink = "loopback";
  bool paced = false;
  std::size_t in_flight = 0;
};

int run_stream(const GlobalOptions& g, const StreamArgs& a) {
  const auto cfg = load(g);
  const auto audio = gf::read_track(a.audio_path);
  const auto force = gf::read_track(a.force_path);
  gf::StreamOptions opts;
  opts.frame_ms = a.frame_ms.value_or(cfg.stream.frame_ms);
  opts.paced = a.paced;
  opts.max_in_flight = a.in_flight;

  std::unique_ptr<gf::ByteSink> sink;
  gf::LoopbackSink* loopback = nullptr;
  if (a.sink == "loopback") {
    auto lb = std::make_unique<gf::LoopbackSink>();
    loopback = lb.get();
    sink = std::move(lb);
  } else if (a.sink.starts_with("file:")) {
    sink = std::make_unique<gf::FileSink>(a.sink.substr(5));
  } else if (a.sink.starts_with("tcp:")) {
    const auto rest = a.sink.substr(4);
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos) throw gf::Error(gf::ErrorCode::InvalidArgument, "expected tcp:HOST:PORT");
    sink = std::make_unique<gf::TcpSink>(rest.substr(0, colon), rest.substr(colon + 1));
  } else {
    throw gf::Error(gf::ErrorCode::InvalidArgument, "unknown sink '" + a.sink + "'");
  }

  const auto summary = gf::stream_tracks(audio, force, *sink, opts);
  std::cout << "audio_frames=" << summary.audio_frames << " force_frames=" << summary.force_frames
            << " total_bytes=" << summary.total_bytes << " late_frames=" << summary.late_frames << "\n";
  if (loopback) {
    const auto back = gf::reassemble(loopback->bytes());
    const bool exact = back.audio.samples == gf::to_wire_precision(audio).samples &&
                       back.force.samples == gf::to_wire_precision(force).samples;
    std::cout << "loopback_exact=" << (exact ? "true" : "false") << "\n";
    if (!exact) return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Granular audio with one-to-one haptic force pulses"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions global;
  app.add_option("--config", global.config_path, "Flat key = value config file")->check(CLI::ExistingFile);
  app.add_option("--out", global.out_dir, "Output directory");
  app.add_option("--seed", global.seed, "Rejected: output is fully deterministic");

  RenderArgs render;
  auto* render_cmd = app.add_subcommand("render", "Render audio and force tracks for a schedule");
  render_cmd->add_option("--schedule", render.schedule_path, "Line-delimited JSON schedule");
  render_cmd->add_option("--count", render.count, "Number of grain events");
  render_cmd->add_option("--interval", render.interval_s, "Seconds between onsets");
  render_cmd->add_option("--first-onset", render.first_onset_s, "Onset of the first event (s)");
  render_cmd->add_option("--duration-ms", render.duration_ms, "Block impulse duration");
  render_cmd->add_option("--amplitude", render.amplitude_n, "Force pulse amplitude (N)");
  render_cmd->add_option("--mode", render.mode, "Force modulation")->check(CLI::IsMember({"constant", "sine"}));
  render_cmd->add_option("--total-s", render.total_s, "Track length in seconds");

  std::string sim_force, sim_device = "ct";
  auto* sim_cmd = app.add_subcommand("simulate", "Run a device model on a force track");
  sim_cmd->add_option("--force", sim_force, "Force track (.wav or .csv)")->required()->check(CLI::ExistingFile);
  sim_cmd->add_option("--device", sim_device, "Device model")->check(CLI::IsMember({"ct", "ksfr"}));

  std::string exp_iface = "all";
  auto* exp_cmd = app.add_subcommand("experiment", "Run the pilot condition grid");
  exp_cmd->add_option("--interface", exp_iface, "Restrict to one interface")
      ->check(CLI::IsMember({"all", "ct", "ksfr", "CT", "KSFR"}));

  std::string align_audio, align_force;
  std::optional<double> align_tol;
  auto* align_cmd = app.add_subcommand("align", "Measure force lag relative to audio");
  align_cmd->add_option("audio", align_audio, "Audio track (.wav)")->required()->check(CLI::ExistingFile);
  align_cmd->add_option("force", align_force, "Force track (.wav or .csv)")->required()->check(CLI::ExistingFile);
  align_cmd->add_option("--tolerance", align_tol, "Maximum |lag| in ms");

  StreamArgs stream;
  auto* stream_cmd = app.add_subcommand("stream", "Stream tracks as GRN1 frames");
  stream_cmd->add_option("--audio", stream.audio_path, "Audio track")->required()->check(CLI::ExistingFile);
  stream_cmd->add_option("--force", stream.force_path, "Force track")->required()->check(CLI::ExistingFile);
  stream_cmd->add_option("--frame-ms", stream.frame_ms, "Frame length in ms");
  stream_cmd->add_option("--sink", stream.sink, "loopback | file:PATH | tcp:HOST:PORT");
  stream_cmd->add_flag("--paced", stream.paced, "Emit frames at their real-time deadlines");
  stream_cmd->add_option("--in-flight", stream.in_flight, "Bounded queue depth (0 = synchronous)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (global.seed) {
    std::cerr << "error: --seed is not accepted; the engine is deterministic\n";
    return 2;
  }
  try {
    if (*render_cmd) return run_render(global, render);
    if (*sim_cmd) return run_simulate(global, sim_force, sim_device);
    if (*exp_cmd) return run_experiment(global, exp_iface);
    if (*align_cmd) return run_align(global, align_audio, align_force, align_tol);
    if (*stream_cmd) return run_stream(global, stream);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
