#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "grainforce/device_sim.hpp"
#include "grainforce/error.hpp"
#include "grainforce/signal_render.hpp"
#include "grainforce/sync_align.hpp"
#include "grainforce/track_io.hpp"

namespace grainforce {

struct RenderConfig {
  double audio_rate_hz = kDefaultAudioRateHz;
  double force_rate_hz = kDefaultForceRateHz;
  double audio_amplitude = 1.0;
};

struct StreamConfig {
  double frame_ms = 1.0;
};

struct EngineConfig {
  RenderConfig render;
  LatencyConfig latency;
  AlignmentOptions alignment;
  CTParams ct;
  KSFRParams ksfr;
  StreamConfig stream;
};

namespace detail {

inline std::map<std::string, double*, std::less<>> config_keys(EngineConfig& c) {
  return {
      {"render.audio_rate_hz", &c.render.audio_rate_hz},
      {"render.force_rate_hz", &c.render.force_rate_hz},
      {"render.audio_amplitude", &c.render.audio_amplitude},
      {"latency.audio_latency_ms", &c.latency.audio_latency_ms},
      {"latency.force_latency_ms", &c.latency.force_latency_ms},
      {"latency.tolerance_ms", &c.latency.tolerance_ms},
      {"align.analysis_rate_hz", &c.alignment.analysis_rate_hz},
      {"align.smoothing_ms", &c.alignment.smoothing_ms},
      {"align.max_lag_ms", &c.alignment.max_lag_ms},
      {"ct.mass_kg", &c.ct.mass_kg},
      {"ct.stiffness_n_per_m", &c.ct.stiffness_n_per_m},
      {"ct.damping_ns_per_m", &c.ct.damping_ns_per_m},
      {"ct.dt_s", &c.ct.dt_s},
      {"ksfr.mass_kg", &c.ksfr.mass_kg},
      {"ksfr.intended_velocity_m_per_s", &c.ksfr.intended_velocity_m_per_s},
      {"ksfr.recovery_gain_n_per_m_per_s", &c.ksfr.recovery_gain_n_per_m_per_s},
      {"ksfr.dt_s", &c.ksfr.dt_s},
      {"stream.frame_ms", &c.stream.frame_ms},
  };
}

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

// Flat `key = value` lines; `#` starts a comment. Unknown keys are errors.
inline EngineConfig parse_config(const std::string& text, EngineConfig base = {}) {
  auto keys = detail::config_keys(base);
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::FormatError, "config line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = detail::trim(line.substr(0, eq));
    const auto value = detail::trim(line.substr(eq + 1));
    auto it = keys.find(key);
    if (it == keys.end()) {
      throw Error(ErrorCode::FormatError, "config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    *it->second = parse_double(value);
  }
  return base;
}

inline EngineConfig load_config(const std::filesystem::path& path) {
  return parse_config(detail::read_file(path));
}

inline std::string format_config(EngineConfig c) {
  std::string out;
  for (const auto& [key, ptr] : detail::config_keys(c)) {
    out += key + " = " + format_double(*ptr) + "\n";
  }
  return out;
}

}  // namespace grainforce
