#pragma once

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "grainforce/error.hpp"
#include "grainforce/grain_model.hpp"

namespace grainforce {

// Line-delimited JSON: one header record, then one record per grain.
//   {"baseline_force_n":0.14,"label":"..."}
//   {"onset_s":0.0,"duration_ms":10.0,...}

inline nlohmann::ordered_json grain_to_json(const GrainSpec& g) {
  nlohmann::ordered_json j;
  j["onset_s"] = g.onset_s;
  j["duration_ms"] = g.duration_ms;
  j["audio_carrier_hz"] = g.audio_carrier_hz;
  j["audio_amplitude"] = g.audio_amplitude;
  j["force_mode"] = std::string(to_string(g.force_mode));
  j["force_amplitude_n"] = g.force_amplitude_n;
  j["force_sine_hz"] = g.force_sine_hz;
  return j;
}

inline GrainSpec grain_from_json(const nlohmann::json& j) {
  GrainSpec g;
  try {
    g.onset_s = j.at("onset_s").get<double>();
    g.duration_ms = j.at("duration_ms").get<double>();
    g.audio_carrier_hz = j.at("audio_carrier_hz").get<double>();
    g.audio_amplitude = j.at("audio_amplitude").get<double>();
    const auto mode = j.at("force_mode").get<std::string>();
    auto parsed = parse_force_mode(mode);
    if (!parsed) throw Error(ErrorCode::FormatError, "unknown force_mode '" + mode + "'");
    g.force_mode = *parsed;
    g.force_amplitude_n = j.at("force_amplitude_n").get<double>();
    g.force_sine_hz = j.value("force_sine_hz", kVibrationHz);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, e.what());
  }
  return g;
}

inline void write_schedule(std::ostream& out, const GrainSchedule& schedule) {
  nlohmann::ordered_json header;
  header["baseline_force_n"] = schedule.baseline_force_n;
  header["label"] = schedule.label;
  out << header.dump() << '\n';
  for (const auto& g : schedule.grains) out << grain_to_json(g).dump() << '\n';
}

inline std::string schedule_to_jsonl(const GrainSchedule& schedule) {
  std::ostringstream out;
  write_schedule(out, schedule);
  return out.str();
}

inline GrainSchedule read_schedule(std::istream& in) {
  GrainSchedule schedule;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::FormatError, "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!have_header) {
      if (!j.contains("baseline_force_n")) {
        throw Error(ErrorCode::FormatError, "first record must carry baseline_force_n");
      }
      schedule.baseline_force_n = j["baseline_force_n"].get<double>();
      schedule.label = j.value("label", std::string{});
      have_header = true;
      continue;
    }
    schedule.grains.push_back(grain_from_json(j));
  }
  if (!have_header) throw Error(ErrorCode::FormatError, "missing schedule header record");
  require_valid(schedule);
  return schedule;
}

inline GrainSchedule schedule_from_jsonl(const std::string& text) {
  std::istringstream in(text);
  return read_schedule(in);
}

}  // namespace grainforce
