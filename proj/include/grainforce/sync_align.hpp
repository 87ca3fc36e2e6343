#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "grainforce/error.hpp"
#include "grainforce/grain_model.hpp"
#include "grainforce/signal_render.hpp"

namespace grainforce {

struct LatencyConfig {
  double audio_latency_ms = 0.0;
  double force_latency_ms = 0.0;
  double tolerance_ms = 1.0;
};

inline void require_valid(const LatencyConfig& cfg) {
  if (!(cfg.audio_latency_ms >= 0.0) || !(cfg.force_latency_ms >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "latencies must be >= 0");
  }
  if (!(cfg.tolerance_ms > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance_ms must be > 0");
}

struct EmissionSchedules {
  GrainSchedule audio;
  GrainSchedule force;
};

// Emit each channel early by its output-path latency so both arrive at the
// nominal onset.
inline EmissionSchedules compensate(const GrainSchedule& schedule, const LatencyConfig& cfg) {
  require_valid(cfg);
  require_valid(schedule);
  EmissionSchedules out{schedule, schedule};
  const double audio_shift = cfg.audio_latency_ms / 1000.0;
  const double force_shift = cfg.force_latency_ms / 1000.0;
  for (std::size_t i = 0; i < schedule.grains.size(); ++i) {
    const double onset = schedule.grains[i].onset_s;
    const double a = onset - audio_shift;
    const double f = onset - force_shift;
    if (a < 0.0 || f < 0.0) {
      throw Error(ErrorCode::NegativeEmissionTime,
                  "onset " + std::to_string(onset) + " s is earlier than the channel latency", i);
    }
    out.audio.grains[i].onset_s = a;
    out.force.grains[i].onset_s = f;
  }
  return out;
}

// Models a constant output-path delay: the same samples, arriving later.
inline SampleTrack apply_channel_delay(SampleTrack track, double delay_ms) {
  track.start_s += delay_ms / 1000.0;
  return track;
}

struct AlignmentOptions {
  double analysis_rate_hz = 8000.0;
  // One full 250 Hz vibration period, so the box filter cancels the ripple.
  double smoothing_ms = 4.0;
  double max_lag_ms = 250.0;
};

namespace detail {

// Rectified, centred moving-average envelope at the track's native rate.
// Force tracks are referenced to their resting (minimum) level first.
inline std::vector<double> envelope(const SampleTrack& track, double smoothing_ms) {
  std::vector<double> rect(track.samples.size());
  double offset = 0.0;
  if (track.unit == SampleUnit::Newtons && !track.samples.empty()) {
    offset = *std::min_element(track.samples.begin(), track.samples.end());
  }
  for (std::size_t i = 0; i < rect.size(); ++i) rect[i] = std::abs(track.samples[i] - offset);

  auto half = static_cast<std::ptrdiff_t>(std::floor(smoothing_ms / 1000.0 * track.rate_hz / 2.0));
  half = std::max<std::ptrdiff_t>(half, 0);
  const double width = static_cast<double>(2 * half + 1);

  const auto n = static_cast<std::ptrdiff_t>(rect.size());
  std::vector<double> prefix(rect.size() + 1, 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + rect[i];
  std::vector<double> env(rect.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto lo = std::max<std::ptrdiff_t>(0, i - half);
    const auto hi = std::min<std::ptrdiff_t>(n, i + half + 1);
    env[i] = (prefix[hi] - prefix[lo]) / width;
  }
  return env;
}

inline double interpolate_at(const std::vector<double>& env, double start_s, double rate_hz,
                             double t) {
  // Each sample holds over [i, i+1) sample periods; place it at the centre.
  const double pos = (t - start_s) * rate_hz - 0.5;
  if (pos < 0.0 || pos > static_cast<double>(env.size() - 1)) return 0.0;
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(i);
  if (i + 1 >= env.size()) return env[i];
  return env[i] + frac * (env[i + 1] - env[i]);
}

}  // namespace detail

// Lag of the force channel relative to the audio channel, in ms; positive
// means force arrives late.
inline double measure_alignment(const SampleTrack& audio, const SampleTrack& force,
                                const AlignmentOptions& opts = {}) {
  if (audio.samples.empty()) throw Error(ErrorCode::SilentTrack, "audio track is empty");
  if (force.samples.empty()) throw Error(ErrorCode::SilentTrack, "force track is empty");
  if (!(opts.analysis_rate_hz > 0.0) || !(opts.max_lag_ms > 0.0) || !(opts.smoothing_ms >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "bad alignment options");
  }
  const auto env_a = detail::envelope(audio, opts.smoothing_ms);
  const auto env_f = detail::envelope(force, opts.smoothing_ms);
  auto all_zero = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
  };
  if (all_zero(env_a)) throw Error(ErrorCode::SilentTrack, "audio envelope is identically zero");
  if (all_zero(env_f)) throw Error(ErrorCode::SilentTrack, "force envelope is identically zero");

  const double rate = opts.analysis_rate_hz;
  const double t0 = std::min(audio.start_s, force.start_s);
  const double t1 = std::max(audio.start_s + audio.duration_s(), force.start_s + force.duration_s());
  const auto n = static_cast<std::size_t>(std::ceil((t1 - t0) * rate)) + 1;

  std::vector<double> a(n), f(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = t0 + static_cast<double>(k) / rate;
    a[k] = detail::interpolate_at(env_a, audio.start_s, audio.rate_hz, t);
    f[k] = detail::interpolate_at(env_f, force.start_s, force.rate_hz, t);
  }

  std::vector<std::size_t> support;
  for (std::size_t k = 0; k < n; ++k) {
    if (a[k] != 0.0) support.push_back(k);
  }

  const auto max_lag = static_cast<std::ptrdiff_t>(std::ceil(opts.max_lag_ms / 1000.0 * rate));
  const auto signed_n = static_cast<std::ptrdiff_t>(n);
  auto corr = [&](std::ptrdiff_t lag) {
    double sum = 0.0;
    for (std::size_t k : support) {
      const auto j = static_cast<std::ptrdiff_t>(k) + lag;
      if (j >= 0 && j < signed_n) sum += a[k] * f[static_cast<std::size_t>(j)];
    }
    return sum;
  };

  std::vector<double> r(static_cast<std::size_t>(2 * max_lag + 1));
  std::size_t best = 0;
  for (std::ptrdiff_t lag = -max_lag; lag <= max_lag; ++lag) {
    const auto idx = static_cast<std::size_t>(lag + max_lag);
    r[idx] = corr(lag);
    if (r[idx] > r[best]) best = idx;
  }
  if (!(r[best] > 0.0)) {
    throw Error(ErrorCode::SilentTrack, "envelopes do not overlap within the lag search range");
  }

  double delta = 0.0;
  if (best > 0 && best + 1 < r.size()) {
    const double rm = r[best - 1], r0 = r[best], rp = r[best + 1];
    const double denom = rm - 2.0 * r0 + rp;
    if (denom < 0.0) delta = 0.5 * (rm - rp) / denom;
  }
  const double lag_samples = static_cast<double>(static_cast<std::ptrdiff_t>(best) - max_lag) + delta;
  return lag_samples / rate * 1000.0;
}

}  // namespace grainforce
