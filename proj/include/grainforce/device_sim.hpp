#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "grainforce/error.hpp"
#include "grainforce/signal_render.hpp"

namespace grainforce {

// Strapped surface pushing perpendicularly against the fingerpad, modelled
// as a mass-spring-damper: m x'' = F(t) - k x - c x'.
struct CTParams {
  double mass_kg = 0.02;
  double stiffness_n_per_m = 500.0;
  double damping_ns_per_m = 2.0;
  double dt_s = 1.0 / kDefaultForceRateHz;
};

// Finger sliding on a surface that renders a force against the motion.
struct KSFRParams {
  double mass_kg = 0.05;
  double intended_velocity_m_per_s = 0.1;
  double recovery_gain_n_per_m_per_s = 8.0;
  double dt_s = 1.0 / kDefaultForceRateHz;
};

struct DeviceTrace {
  std::vector<double> time_s;
  std::vector<double> position_m;
  std::vector<double> velocity_m_per_s;
  std::vector<double> applied_force_n;

  std::size_t size() const { return time_s.size(); }

  void reserve(std::size_t n) {
    time_s.reserve(n);
    position_m.reserve(n);
    velocity_m_per_s.reserve(n);
    applied_force_n.reserve(n);
  }
  void push(double t, double x, double v, double f) {
    time_s.push_back(t);
    position_m.push_back(x);
    velocity_m_per_s.push_back(v);
    applied_force_n.push_back(f);
  }
};

namespace detail {

inline void require_force_track(const SampleTrack& force) {
  if (force.unit != SampleUnit::Newtons) {
    throw Error(ErrorCode::InvalidArgument, "device simulation needs a force track in Newtons");
  }
  if (auto msg = check_track(force); !msg.empty()) throw Error(ErrorCode::InvalidArgument, msg);
}

// Integration substeps per force sample so that the step never exceeds dt_s.
inline std::size_t substeps_for(double dt_s, double rate_hz) {
  if (!(dt_s > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt_s must be > 0");
  const double period = 1.0 / rate_hz;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(period / dt_s - 1e-9)));
}

}  // namespace detail

// Starts at rest in equilibrium with the track's first sample (the resting
// contact force) and reports displacement relative to that equilibrium.
inline DeviceTrace simulate_ct(const SampleTrack& force, const CTParams& p = {}) {
  detail::require_force_track(force);
  if (!(p.mass_kg > 0.0) || !(p.stiffness_n_per_m > 0.0) || !(p.damping_ns_per_m > 0.0) ||
      !(p.dt_s > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "CT parameters must all be > 0");
  }
  if (p.dt_s > 1.0 / force.rate_hz + 1e-15) {
    throw Error(ErrorCode::InvalidArgument, "dt_s must not exceed the force sample period");
  }
  DeviceTrace trace;
  trace.reserve(force.size());
  if (force.samples.empty()) return trace;

  const std::size_t sub = detail::substeps_for(p.dt_s, force.rate_hz);
  const double h = 1.0 / force.rate_hz / static_cast<double>(sub);
  const double x0 = force.samples.front() / p.stiffness_n_per_m;
  double x = x0;
  double v = 0.0;
  for (std::size_t i = 0; i < force.size(); ++i) {
    const double f = force.samples[i];
    trace.push(force.time_of(i), x - x0, v, f);
    for (std::size_t s = 0; s < sub; ++s) {
      const double acc = (f - p.stiffness_n_per_m * x - p.damping_ns_per_m * v) / p.mass_kg;
      v += h * acc;
      x += h * v;
    }
    if (!std::isfinite(x) || !std::isfinite(v)) {
      throw Error(ErrorCode::UnstableIntegration, "CT state diverged at sample " + std::to_string(i));
    }
  }
  return trace;
}

// The finger starts moving at the intended velocity. The opposing force is
// the track's excess over its first sample (the resting contact force) and
// acts only while the finger moves; it can stop the finger but never reverse it.
inline DeviceTrace simulate_ksfr(const SampleTrack& force, const KSFRParams& p = {}) {
  detail::require_force_track(force);
  if (!(p.mass_kg > 0.0) || !(p.dt_s > 0.0) || !(p.recovery_gain_n_per_m_per_s >= 0.0) ||
      !std::isfinite(p.intended_velocity_m_per_s)) {
    throw Error(ErrorCode::InvalidArgument, "invalid KSFR parameters");
  }
  DeviceTrace trace;
  trace.reserve(force.size());
  if (force.samples.empty()) return trace;

  const std::size_t sub = detail::substeps_for(p.dt_s, force.rate_hz);
  const double h = 1.0 / force.rate_hz / static_cast<double>(sub);
  const double rest = force.samples.front();
  double x = 0.0;
  double v = p.intended_velocity_m_per_s;
  for (std::size_t i = 0; i < force.size(); ++i) {
    const double opposing = std::max(0.0, force.samples[i] - rest);
    trace.push(force.time_of(i), x, v, opposing);
    for (std::size_t s = 0; s < sub; ++s) {
      const double drive = p.recovery_gain_n_per_m_per_s * (p.intended_velocity_m_per_s - v);
      const double dir = (v > 0.0) ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
      const double next = v + h * (drive - dir * opposing) / p.mass_kg;
      // Clamp: the opposing force stops the motion but does not reverse it.
      if (dir != 0.0 && opposing > 0.0 && (next > 0.0) != (v > 0.0) && next != 0.0) {
        v = 0.0;
      } else {
        v = next;
      }
      x += h * v;
    }
    if (!std::isfinite(x) || !std::isfinite(v)) {
      throw Error(ErrorCode::UnstableIntegration, "KSFR state diverged at sample " + std::to_string(i));
    }
  }
  return trace;
}

inline double peak_displacement(const DeviceTrace& trace) {
  double peak = 0.0;
  for (double x : trace.position_m) peak = std::max(peak, x);
  return peak;
}

inline double peak_velocity_deficit(const DeviceTrace& trace, double intended_velocity) {
  double peak = 0.0;
  for (double v : trace.velocity_m_per_s) peak = std::max(peak, intended_velocity - v);
  return peak;
}

}  // namespace grainforce
