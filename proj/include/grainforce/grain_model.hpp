#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "grainforce/error.hpp"

namespace grainforce {

// Fixed stimulus constants of the pilot grid.
inline constexpr double kGrainOnsetIntervalS = 1.00;
inline constexpr double kAudioCarrierHz = 4000.0;
inline constexpr double kBaselineForceN = 0.14;
inline constexpr double kVibrationHz = 250.0;
inline constexpr double kMinGrainDurationMs = 1.0;
inline constexpr double kMaxGrainDurationMs = 100.0;

enum class ForceMode { Constant, Sine };

inline std::string_view to_string(ForceMode mode) {
  return mode == ForceMode::Constant ? "Constant" : "Sine";
}

inline std::optional<ForceMode> parse_force_mode(std::string_view text) {
  if (text == "Constant") return ForceMode::Constant;
  if (text == "Sine") return ForceMode::Sine;
  return std::nullopt;
}

// One grain event: a block-gated audio burst and its paired force pulse.
struct GrainSpec {
  double onset_s = 0.0;
  double duration_ms = 10.0;
  double audio_carrier_hz = kAudioCarrierHz;
  double audio_amplitude = 1.0;
  ForceMode force_mode = ForceMode::Constant;
  double force_amplitude_n = 1.00;
  double force_sine_hz = kVibrationHz;

  double end_s() const { return onset_s + duration_ms / 1000.0; }

  friend bool operator==(const GrainSpec&, const GrainSpec&) = default;
};

struct GrainSchedule {
  std::vector<GrainSpec> grains;
  double baseline_force_n = kBaselineForceN;
  std::string label;

  friend bool operator==(const GrainSchedule&, const GrainSchedule&) = default;
};

struct ValidationResult {
  std::optional<ErrorCode> error;
  std::string field;
  std::optional<std::size_t> grain_index;

  bool ok() const { return !error.has_value(); }
  explicit operator bool() const { return ok(); }

  static ValidationResult accept() { return {}; }
  static ValidationResult reject(ErrorCode code, std::string field,
                                 std::optional<std::size_t> index = std::nullopt) {
    return {code, std::move(field), index};
  }
};

inline ValidationResult validate_grain(const GrainSpec& spec) {
  if (!std::isfinite(spec.onset_s)) {
    return ValidationResult::reject(ErrorCode::InvalidArgument, "onset_s");
  }
  if (!(spec.duration_ms >= kMinGrainDurationMs && spec.duration_ms <= kMaxGrainDurationMs)) {
    return ValidationResult::reject(ErrorCode::DurationOutOfRange, "duration_ms");
  }
  if (!(spec.audio_amplitude >= 0.0)) {
    return ValidationResult::reject(ErrorCode::NegativeAmplitude, "audio_amplitude");
  }
  if (!(spec.audio_amplitude <= 1.0)) {
    return ValidationResult::reject(ErrorCode::InvalidArgument, "audio_amplitude");
  }
  if (!(spec.force_amplitude_n >= 0.0) || !std::isfinite(spec.force_amplitude_n)) {
    return ValidationResult::reject(ErrorCode::NegativeAmplitude, "force_amplitude_n");
  }
  if (!(spec.audio_carrier_hz > 0.0) || !std::isfinite(spec.audio_carrier_hz)) {
    return ValidationResult::reject(ErrorCode::NonPositiveFrequency, "audio_carrier_hz");
  }
  if (!(spec.force_sine_hz > 0.0) || !std::isfinite(spec.force_sine_hz)) {
    return ValidationResult::reject(ErrorCode::NonPositiveFrequency, "force_sine_hz");
  }
  return ValidationResult::accept();
}

// Number of vibration periods that fit in a pulse.
inline double vibratory_cycle_count(double duration_ms, double force_sine_hz) {
  if (!(force_sine_hz > 0.0)) {
    throw Error(ErrorCode::NonPositiveFrequency, "force_sine_hz must be > 0");
  }
  if (!(duration_ms > 0.0)) {
    throw Error(ErrorCode::DurationOutOfRange, "duration_ms must be > 0");
  }
  return duration_ms / 1000.0 * force_sine_hz;
}

// A vibratory pulse is well formed only if it holds at least one full cycle.
inline bool cycle_fit_check(const GrainSpec& spec) {
  if (spec.force_mode == ForceMode::Constant) return true;
  return vibratory_cycle_count(spec.duration_ms, spec.force_sine_hz) >= 1.0;
}

inline ValidationResult validate_schedule(const GrainSchedule& schedule) {
  if (!(schedule.baseline_force_n >= 0.0) || !std::isfinite(schedule.baseline_force_n)) {
    return ValidationResult::reject(ErrorCode::NegativeAmplitude, "baseline_force_n");
  }
  for (std::size_t i = 0; i < schedule.grains.size(); ++i) {
    auto r = validate_grain(schedule.grains[i]);
    if (!r) {
      r.grain_index = i;
      return r;
    }
    if (i + 1 < schedule.grains.size()) {
      const auto& cur = schedule.grains[i];
      const auto& next = schedule.grains[i + 1];
      if (!(cur.onset_s < next.onset_s)) {
        return ValidationResult::reject(ErrorCode::InvalidSchedule, "onset_s", i + 1);
      }
      if (cur.end_s() > next.onset_s) {
        return ValidationResult::reject(ErrorCode::OverlapError, "duration_ms", i);
      }
    }
  }
  return ValidationResult::accept();
}

inline void require_valid(const GrainSchedule& schedule) {
  auto r = validate_schedule(schedule);
  if (r) return;
  const std::string msg = "invalid field '" + r.field + "'";
  if (r.grain_index) throw Error(*r.error, msg, *r.grain_index);
  throw Error(*r.error, msg);
}

inline GrainSchedule make_periodic_schedule(std::size_t count, double interval_s,
                                            const GrainSpec& grain_template,
                                            double baseline_force_n,
                                            double first_onset_s = 0.0,
                                            std::string label = {}) {
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "count must be >= 1");
  if (auto r = validate_grain(grain_template); !r) {
    throw Error(*r.error, "template field '" + r.field + "'");
  }
  if (count > 1 && !(interval_s * 1000.0 > grain_template.duration_ms)) {
    throw Error(ErrorCode::OverlapError,
                "interval " + std::to_string(interval_s) + " s does not fit a " +
                    std::to_string(grain_template.duration_ms) + " ms pulse");
  }
  GrainSchedule schedule;
  schedule.baseline_force_n = baseline_force_n;
  schedule.label = std::move(label);
  schedule.grains.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    GrainSpec g = grain_template;
    g.onset_s = first_onset_s + static_cast<double>(k) * interval_s;
    schedule.grains.push_back(g);
  }
  require_valid(schedule);
  return schedule;
}

// Seconds to the nearest sample index, halves rounded up.
inline std::int64_t to_sample_index(double seconds, double rate_hz) {
  return static_cast<std::int64_t>(std::floor(seconds * rate_hz + 0.5));
}

inline std::int64_t duration_samples(double duration_ms, double rate_hz) {
  return static_cast<std::int64_t>(std::floor(duration_ms * rate_hz / 1000.0 + 0.5));
}

}  // namespace grainforce
