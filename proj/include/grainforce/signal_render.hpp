#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "grainforce/error.hpp"
#include "grainforce/grain_model.hpp"

namespace grainforce {

inline constexpr double kDefaultAudioRateHz = 48000.0;
inline constexpr double kDefaultForceRateHz = 8000.0;

enum class SampleUnit { NormalizedAudio, Newtons };

inline std::string_view to_string(SampleUnit unit) {
  return unit == SampleUnit::NormalizedAudio ? "normalized" : "newtons";
}

struct SampleTrack {
  double rate_hz = kDefaultAudioRateHz;
  SampleUnit unit = SampleUnit::NormalizedAudio;
  std::vector<double> samples;
  double start_s = 0.0;

  std::size_t size() const { return samples.size(); }
  double duration_s() const { return static_cast<double>(samples.size()) / rate_hz; }
  double time_of(std::size_t i) const { return start_s + static_cast<double>(i) / rate_hz; }

  friend bool operator==(const SampleTrack&, const SampleTrack&) = default;
};

// Empty string when the track satisfies its unit invariants.
inline std::string check_track(const SampleTrack& track) {
  if (!(track.rate_hz > 0.0) || !std::isfinite(track.rate_hz)) return "rate_hz must be > 0";
  if (!std::isfinite(track.start_s)) return "start_s must be finite";
  for (std::size_t i = 0; i < track.samples.size(); ++i) {
    const double v = track.samples[i];
    if (!std::isfinite(v)) return "non-finite sample at " + std::to_string(i);
    if (track.unit == SampleUnit::NormalizedAudio && (v < -1.0 || v > 1.0)) {
      return "audio sample outside [-1,1] at " + std::to_string(i);
    }
    if (track.unit == SampleUnit::Newtons && v < 0.0) {
      return "negative force at " + std::to_string(i);
    }
  }
  return {};
}

// 0/1 gate: `start_offset_samples` zeros followed by the impulse.
inline SampleTrack render_block_impulse(double duration_ms, double rate_hz,
                                        std::size_t start_offset_samples = 0) {
  if (!(duration_ms > 0.0)) throw Error(ErrorCode::DurationOutOfRange, "duration_ms must be > 0");
  if (!(rate_hz > 0.0)) throw Error(ErrorCode::InvalidArgument, "rate_hz must be > 0");
  const auto n = static_cast<std::size_t>(duration_samples(duration_ms, rate_hz));
  SampleTrack track{rate_hz, SampleUnit::NormalizedAudio, {}, 0.0};
  track.samples.assign(start_offset_samples + n, 0.0);
  std::fill(track.samples.begin() + static_cast<std::ptrdiff_t>(start_offset_samples),
            track.samples.end(), 1.0);
  return track;
}

namespace detail {

inline void require_grain(const GrainSpec& spec) {
  if (auto r = validate_grain(spec); !r) {
    throw Error(*r.error, "invalid field '" + r.field + "'");
  }
}

inline void fill_audio(std::span<double> out, const GrainSpec& spec, double rate_hz) {
  const double w = 2.0 * std::numbers::pi * spec.audio_carrier_hz / rate_hz;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = spec.audio_amplitude * std::sin(w * static_cast<double>(i));
  }
}

inline void fill_force(std::span<double> out, const GrainSpec& spec, double baseline_n,
                       double rate_hz) {
  if (spec.force_mode == ForceMode::Constant) {
    for (auto& v : out) v = baseline_n + spec.force_amplitude_n;
    return;
  }
  // Unipolar raised cosine: each cycle leaves and returns to the baseline.
  const double w = 2.0 * std::numbers::pi * spec.force_sine_hz / rate_hz;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = baseline_n +
             spec.force_amplitude_n * (0.5 - 0.5 * std::cos(w * static_cast<double>(i)));
  }
}

inline void require_force_renderable(const GrainSpec& spec, double baseline_n, double rate_hz) {
  if (!(baseline_n >= 0.0)) throw Error(ErrorCode::NegativeAmplitude, "baseline_force_n < 0");
  if (spec.force_mode == ForceMode::Sine) {
    if (!cycle_fit_check(spec)) {
      throw Error(ErrorCode::CycleFitError,
                  std::to_string(spec.duration_ms) + " ms holds " +
                      std::to_string(vibratory_cycle_count(spec.duration_ms, spec.force_sine_hz)) +
                      " vibration cycles, need >= 1");
    }
    if (!(rate_hz > 2.0 * spec.force_sine_hz)) {
      throw Error(ErrorCode::UnderSampledCarrier,
                  "force rate " + std::to_string(rate_hz) + " Hz cannot carry " +
                      std::to_string(spec.force_sine_hz) + " Hz");
    }
  }
}

inline void require_audio_renderable(const GrainSpec& spec, double rate_hz) {
  if (!(rate_hz > 2.0 * spec.audio_carrier_hz)) {
    throw Error(ErrorCode::UnderSampledCarrier,
                "audio rate " + std::to_string(rate_hz) + " Hz cannot carry " +
                    std::to_string(spec.audio_carrier_hz) + " Hz");
  }
}

}  // namespace detail

// Audio burst for one grain; sample 0 sits at the grain onset (snapped to the grid).
inline SampleTrack render_audio_grain(const GrainSpec& spec, double rate_hz = kDefaultAudioRateHz) {
  detail::require_grain(spec);
  detail::require_audio_renderable(spec, rate_hz);
  SampleTrack track{rate_hz, SampleUnit::NormalizedAudio, {},
                    static_cast<double>(to_sample_index(spec.onset_s, rate_hz)) / rate_hz};
  track.samples.resize(static_cast<std::size_t>(duration_samples(spec.duration_ms, rate_hz)));
  detail::fill_audio(track.samples, spec, rate_hz);
  return track;
}

// Force pulse samples for one grain (the impulse window only).
inline SampleTrack render_force_grain(const GrainSpec& spec, double baseline_force_n,
                                      double rate_hz = kDefaultForceRateHz) {
  detail::require_grain(spec);
  detail::require_force_renderable(spec, baseline_force_n, rate_hz);
  SampleTrack track{rate_hz, SampleUnit::Newtons, {},
                    static_cast<double>(to_sample_index(spec.onset_s, rate_hz)) / rate_hz};
  track.samples.resize(static_cast<std::size_t>(duration_samples(spec.duration_ms, rate_hz)));
  detail::fill_force(track.samples, spec, baseline_force_n, rate_hz);
  return track;
}

// Half-open sample ranges occupied by one grain on each channel.
struct PulseWindow {
  std::size_t audio_begin = 0;
  std::size_t audio_end = 0;
  std::size_t force_begin = 0;
  std::size_t force_end = 0;
};

struct RenderedTracks {
  SampleTrack audio;
  SampleTrack force;
  std::vector<PulseWindow> windows;
};

inline RenderedTracks render_tracks(const GrainSchedule& schedule,
                                    double audio_rate_hz, double force_rate_hz, double total_s) {
  require_valid(schedule);
  if (!(total_s >= 0.0)) throw Error(ErrorCode::InvalidArgument, "total_s must be >= 0");
  if (!(audio_rate_hz > 0.0) || !(force_rate_hz > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "rates must be > 0");
  }
  const auto n_audio = static_cast<std::size_t>(to_sample_index(total_s, audio_rate_hz));
  const auto n_force = static_cast<std::size_t>(to_sample_index(total_s, force_rate_hz));

  RenderedTracks out{
      SampleTrack{audio_rate_hz, SampleUnit::NormalizedAudio, std::vector<double>(n_audio, 0.0), 0.0},
      SampleTrack{force_rate_hz, SampleUnit::Newtons,
                  std::vector<double>(n_force, schedule.baseline_force_n), 0.0},
      {}};
  out.windows.reserve(schedule.grains.size());

  for (std::size_t gi = 0; gi < schedule.grains.size(); ++gi) {
    const auto& g = schedule.grains[gi];
    try {
      detail::require_audio_renderable(g, audio_rate_hz);
      detail::require_force_renderable(g, schedule.baseline_force_n, force_rate_hz);
    } catch (const Error& e) {
      throw Error(e.code(), e.what(), gi);
    }
    if (g.onset_s < 0.0) throw Error(ErrorCode::InvalidArgument, "negative onset", gi);

    PulseWindow w;
    w.audio_begin = static_cast<std::size_t>(to_sample_index(g.onset_s, audio_rate_hz));
    w.audio_end = w.audio_begin +
                  static_cast<std::size_t>(duration_samples(g.duration_ms, audio_rate_hz));
    w.force_begin = static_cast<std::size_t>(to_sample_index(g.onset_s, force_rate_hz));
    w.force_end = w.force_begin +
                  static_cast<std::size_t>(duration_samples(g.duration_ms, force_rate_hz));
    if (w.audio_end > n_audio || w.force_end > n_force) {
      throw Error(ErrorCode::InvalidArgument,
                  "total_s " + std::to_string(total_s) + " does not cover grain end", gi);
    }
    // Pulses that touch on the sample grid would merge into one displayed pulse.
    if (!out.windows.empty() && (w.force_begin <= out.windows.back().force_end ||
                                 w.audio_begin < out.windows.back().audio_end)) {
      throw Error(ErrorCode::OverlapError,
                  "pulse is not separated from the previous one by at least one force sample", gi);
    }

    detail::fill_audio(std::span(out.audio.samples).subspan(w.audio_begin, w.audio_end - w.audio_begin),
                       g, audio_rate_hz);
    detail::fill_force(std::span(out.force.samples).subspan(w.force_begin, w.force_end - w.force_begin),
                       g, schedule.baseline_force_n, force_rate_hz);
    out.windows.push_back(w);
  }
  return out;
}

// Maximal runs of samples strictly above `baseline`.
inline std::size_t count_above_baseline_runs(std::span<const double> samples, double baseline) {
  std::size_t runs = 0;
  bool inside = false;
  for (double v : samples) {
    const bool above = v > baseline;
    if (above && !inside) ++runs;
    inside = above;
  }
  return runs;
}

}  // namespace grainforce
