#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "grainforce/config.hpp"
#include "grainforce/device_sim.hpp"
#include "grainforce/error.hpp"
#include "grainforce/grain_model.hpp"
#include "grainforce/signal_render.hpp"
#include "grainforce/sync_align.hpp"
#include "grainforce/track_io.hpp"

namespace grainforce {

enum class Interface { CT, KSFR };

inline std::string_view to_string(Interface i) { return i == Interface::CT ? "CT" : "KSFR"; }

inline std::optional<Interface> parse_interface(std::string_view text) {
  if (text == "CT" || text == "ct") return Interface::CT;
  if (text == "KSFR" || text == "ksfr") return Interface::KSFR;
  return std::nullopt;
}

// The varied factors of the pilot grid, in reporting order.
inline constexpr Interface kInterfaces[] = {Interface::CT, Interface::KSFR};
inline constexpr double kDurationsMs[] = {100.0, 50.0, 10.0, 1.0};
inline constexpr double kForceAmplitudesN[] = {1.00, 0.72, 0.43};
inline constexpr ForceMode kForceModes[] = {ForceMode::Constant, ForceMode::Sine};

inline constexpr std::size_t kEventsPerCondition = 3;
// Silence before the first event; leaves room for latency compensation.
inline constexpr double kLeadInS = 0.5;

inline constexpr std::string_view kReasonNoFullCycle = "vibratory-pulse-below-one-cycle";
inline constexpr std::string_view kReasonKsfrHousing = "ksfr-1ms-housing-artifact";

struct Condition {
  Interface interface = Interface::CT;
  double duration_ms = 100.0;
  double force_amplitude_n = 1.00;
  ForceMode force_mode = ForceMode::Constant;

  friend bool operator==(const Condition&, const Condition&) = default;
};

inline std::string condition_id(const Condition& c) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%gms_%.2fN_%s", c.interface == Interface::CT ? "ct" : "ksfr",
                c.duration_ms, c.force_amplitude_n,
                c.force_mode == ForceMode::Constant ? "constant" : "sine250");
  return buf;
}

inline GrainSpec grain_for(const Condition& c, double audio_amplitude = 1.0) {
  GrainSpec g;
  g.duration_ms = c.duration_ms;
  g.audio_carrier_hz = kAudioCarrierHz;
  g.audio_amplitude = audio_amplitude;
  g.force_mode = c.force_mode;
  g.force_amplitude_n = c.force_amplitude_n;
  g.force_sine_hz = kVibrationHz;
  return g;
}

// Comma-separated exclusion reasons; empty when the cell is included.
inline std::string exclusion_reason(const Condition& c) {
  std::string reason;
  if (!cycle_fit_check(grain_for(c))) reason = kReasonNoFullCycle;
  if (c.interface == Interface::KSFR && c.duration_ms == 1.0) {
    if (!reason.empty()) reason += ',';
    reason += kReasonKsfrHousing;
  }
  return reason;
}

struct ConditionEntry {
  Condition condition;
  bool included = true;
  std::string reason;
};

inline std::vector<ConditionEntry> enumerate_conditions() {
  std::vector<ConditionEntry> out;
  for (auto iface : kInterfaces)
    for (double d : kDurationsMs)
      for (double a : kForceAmplitudesN)
        for (auto mode : kForceModes) {
          Condition c{iface, d, a, mode};
          auto reason = exclusion_reason(c);
          out.push_back({c, reason.empty(), std::move(reason)});
        }
  return out;
}

struct ConditionReport {
  Condition condition;
  bool included = true;
  std::string exclusion_reason;
  std::optional<double> rms_force_n;
  std::optional<double> pulse_energy_n2s;
  std::optional<double> cycle_count;
  std::optional<double> peak_displacement_m;
  std::optional<double> peak_velocity_deficit_m_per_s;
  std::optional<double> measured_lag_ms;
  std::optional<std::size_t> pulse_runs;
  std::string error;

  // Peak device response on whichever interface the condition targets.
  std::optional<double> peak_response() const {
    return condition.interface == Interface::CT ? peak_displacement_m : peak_velocity_deficit_m_per_s;
  }
};

// Static labels for the sensation type reported for vibratory pulses; never computed.
inline std::optional<std::string> reported_sensation(const Condition& c) {
  if (c.force_mode != ForceMode::Sine) return std::nullopt;
  if (c.duration_ms >= 50.0) return "vibration";
  if (c.duration_ms == 10.0) return "pulsed";
  return std::nullopt;
}

inline nlohmann::ordered_json to_json(const ConditionReport& r) {
  auto opt = [](const auto& v) -> nlohmann::ordered_json {
    if (v) return *v;
    return nullptr;
  };
  nlohmann::ordered_json j;
  j["id"] = condition_id(r.condition);
  j["interface"] = std::string(to_string(r.condition.interface));
  j["duration_ms"] = r.condition.duration_ms;
  j["force_amplitude_n"] = r.condition.force_amplitude_n;
  j["force_mode"] = r.condition.force_mode == ForceMode::Constant ? "Constant" : "Sine250";
  j["included"] = r.included;
  j["exclusion_reason"] = r.included ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(r.exclusion_reason);
  j["rms_force_n"] = opt(r.rms_force_n);
  j["pulse_energy_n2s"] = opt(r.pulse_energy_n2s);
  j["cycle_count"] = opt(r.cycle_count);
  j["peak_displacement_m"] = opt(r.peak_displacement_m);
  j["peak_velocity_deficit_m_per_s"] = opt(r.peak_velocity_deficit_m_per_s);
  j["measured_lag_ms"] = opt(r.measured_lag_ms);
  j["pulse_runs"] = opt(r.pulse_runs);
  j["reported_sensation"] = opt(reported_sensation(r.condition));
  j["error"] = r.error.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(r.error);
  return j;
}

struct ConditionRun {
  ConditionReport report;
  GrainSchedule schedule;
  RenderedTracks audio_render;  // emission-time audio channel
  RenderedTracks force_render;  // emission-time force channel
  DeviceTrace trace;
};

inline double schedule_total_s() {
  return kLeadInS + static_cast<double>(kEventsPerCondition) * kGrainOnsetIntervalS;
}

inline ConditionRun run_condition(const Condition& c, const EngineConfig& cfg = {}) {
  if (auto reason = exclusion_reason(c); !reason.empty()) {
    throw Error(ErrorCode::ExcludedCondition, condition_id(c) + " is excluded: " + reason);
  }
  ConditionRun run;
  run.report.condition = c;
  run.schedule = make_periodic_schedule(kEventsPerCondition, kGrainOnsetIntervalS,
                                        grain_for(c, cfg.render.audio_amplitude), kBaselineForceN,
                                        kLeadInS, condition_id(c));

  const auto emission = compensate(run.schedule, cfg.latency);
  const double total = schedule_total_s();
  run.audio_render = render_tracks(emission.audio, cfg.render.audio_rate_hz, cfg.render.force_rate_hz, total);
  run.force_render = render_tracks(emission.force, cfg.render.audio_rate_hz, cfg.render.force_rate_hz, total);
  const SampleTrack& force = run.force_render.force;

  const auto arrived_audio = apply_channel_delay(run.audio_render.audio, cfg.latency.audio_latency_ms);
  const auto arrived_force = apply_channel_delay(force, cfg.latency.force_latency_ms);
  run.report.measured_lag_ms = measure_alignment(arrived_audio, arrived_force, cfg.alignment);

  const auto& w = run.force_render.windows.front();
  double sum_sq = 0.0;
  for (std::size_t i = w.force_begin; i < w.force_end; ++i) {
    const double d = force.samples[i] - kBaselineForceN;
    sum_sq += d * d;
  }
  const auto n = static_cast<double>(w.force_end - w.force_begin);
  run.report.rms_force_n = std::sqrt(sum_sq / n);
  run.report.pulse_energy_n2s = sum_sq / force.rate_hz;
  if (c.force_mode == ForceMode::Sine) {
    run.report.cycle_count = vibratory_cycle_count(c.duration_ms, kVibrationHz);
  }
  run.report.pulse_runs = count_above_baseline_runs(force.samples, kBaselineForceN);

  if (c.interface == Interface::CT) {
    run.trace = simulate_ct(force, cfg.ct);
    run.report.peak_displacement_m = peak_displacement(run.trace);
  } else {
    run.trace = simulate_ksfr(force, cfg.ksfr);
    run.report.peak_velocity_deficit_m_per_s =
        peak_velocity_deficit(run.trace, cfg.ksfr.intended_velocity_m_per_s);
  }
  return run;
}

struct GridOptions {
  std::optional<Interface> only;
  std::optional<std::filesystem::path> out_dir;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct GridResult {
  std::vector<ConditionReport> reports;     // included cells, in grid order
  std::vector<ConditionReport> exclusions;  // excluded cells, in grid order
  std::size_t failures = 0;

  std::vector<ConditionReport> all_records() const {
    std::vector<ConditionReport> all = reports;
    all.insert(all.end(), exclusions.begin(), exclusions.end());
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
      return grid_rank(a.condition) < grid_rank(b.condition);
    });
    return all;
  }

  static std::size_t grid_rank(const Condition& c) {
    std::size_t rank = 0;
    for (const auto& e : enumerate_conditions()) {
      if (e.condition == c) return rank;
      ++rank;
    }
    return rank;
  }
};

inline std::string report_jsonl(const GridResult& grid) {
  std::string out;
  for (const auto& r : grid.all_records()) out += to_json(r).dump() + "\n";
  return out;
}

inline std::string summary_table(const GridResult& grid) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-28s %9s %12s %7s %14s %9s  %s\n", "condition", "rms_n",
                "energy_n2s", "cycles", "peak_response", "lag_ms", "status");
  out += line;
  auto num = [](const std::optional<double>& v, const char* fmt) {
    char b[32];
    if (!v) return std::string("-");
    std::snprintf(b, sizeof b, fmt, *v);
    return std::string(b);
  };
  for (const auto& r : grid.all_records()) {
    std::string status = r.included ? (r.error.empty() ? "ok" : "error: " + r.error)
                                    : "excluded: " + r.exclusion_reason;
    std::snprintf(line, sizeof line, "%-28s %9s %12s %7s %14s %9s  %s\n",
                  condition_id(r.condition).c_str(), num(r.rms_force_n, "%.4f").c_str(),
                  num(r.pulse_energy_n2s, "%.4e").c_str(), num(r.cycle_count, "%.2f").c_str(),
                  num(r.peak_response(), "%.4e").c_str(), num(r.measured_lag_ms, "%+.3f").c_str(),
                  status.c_str());
    out += line;
  }
  std::snprintf(line, sizeof line, "%zu reports, %zu exclusion records, %zu failures\n",
                grid.reports.size(), grid.exclusions.size(), grid.failures);
  out += line;
  return out;
}

inline void write_condition_files(const std::filesystem::path& dir, const ConditionRun& run) {
  const auto id = condition_id(run.report.condition);
  write_wav(dir / (id + "_audio.wav"), run.audio_render.audio);
  write_wav(dir / (id + "_force.wav"), run.force_render.force);
  write_force_csv(dir / (id + "_force.csv"), run.force_render.force);
  write_trace_csv(dir / (id + "_trace.csv"), run.trace);
}

// Runs every included cell. A failing cell is recorded in its report and
// does not stop the grid.
inline GridResult run_grid(const EngineConfig& cfg = {}, const GridOptions& opts = {}) {
  std::vector<ConditionEntry> cells;
  for (auto& e : enumerate_conditions()) {
    if (!opts.only || e.condition.interface == *opts.only) cells.push_back(std::move(e));
  }
  if (opts.out_dir) std::filesystem::create_directories(*opts.out_dir);

  std::vector<ConditionReport> results(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const auto& cell = cells[i];
      ConditionReport& r = results[i];
      r.condition = cell.condition;
      r.included = cell.included;
      r.exclusion_reason = cell.reason;
      if (!cell.included) continue;
      try {
        auto run = run_condition(cell.condition, cfg);
        r = run.report;
        if (opts.out_dir) write_condition_files(*opts.out_dir, run);
      } catch (const std::exception& e) {
        r.error = e.what();
      }
    }
  };
  unsigned n_threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(std::max<std::size_t>(1, cells.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
  }

  GridResult grid;
  for (auto& r : results) {
    if (!r.error.empty()) ++grid.failures;
    (r.included ? grid.reports : grid.exclusions).push_back(std::move(r));
  }
  if (opts.out_dir) {
    detail::write_file(*opts.out_dir / "report.jsonl", report_jsonl(grid));
    detail::write_file(*opts.out_dir / "summary.txt", summary_table(grid));
  }
  return grid;
}

}  // namespace grainforce
