#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "grainforce/error.hpp"
#include "grainforce/frame.hpp"
#include "grainforce/signal_render.hpp"

namespace grainforce {

// Reliable, ordered byte-stream endpoint. `write` returns false once the
// sink is closed; nothing from a rejected write is delivered.
class ByteSink {
 public:
  virtual ~ByteSink() = default;
  virtual bool write(std::span<const std::uint8_t> bytes) = 0;
};

class SinkClosedError : public Error {
 public:
  SinkClosedError(std::optional<std::uint32_t> last_audio_seq,
                  std::optional<std::uint32_t> last_force_seq)
      : Error(ErrorCode::SinkClosed, describe(last_audio_seq, last_force_seq)),
        last_audio_seq_(last_audio_seq),
        last_force_seq_(last_force_seq) {}

  std::optional<std::uint32_t> last_audio_seq() const { return last_audio_seq_; }
  std::optional<std::uint32_t> last_force_seq() const { return last_force_seq_; }
  // Highest seq the sink acknowledged on either channel.
  std::optional<std::uint32_t> last_seq() const {
    if (!last_audio_seq_) return last_force_seq_;
    if (!last_force_seq_) return last_audio_seq_;
    return std::max(*last_audio_seq_, *last_force_seq_);
  }

 private:
  static std::string describe(std::optional<std::uint32_t> a, std::optional<std::uint32_t> f) {
    auto s = [](std::optional<std::uint32_t> v) { return v ? std::to_string(*v) : std::string("none"); };
    return "sink closed mid-stream; last acknowledged seq audio=" + s(a) + " force=" + s(f);
  }

  std::optional<std::uint32_t> last_audio_seq_;
  std::optional<std::uint32_t> last_force_seq_;
};

// Keeps everything written; `reassemble` rebuilds the two channels.
class LoopbackSink : public ByteSink {
 public:
  bool write(std::span<const std::uint8_t> bytes) override {
    bytes_.insert(bytes_.end(), bytes.begin(), bytes.end());
    return true;
  }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class FileSink : public ByteSink {
 public:
  explicit FileSink(const std::filesystem::path& path)
      : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  }
  bool write(std::span<const std::uint8_t> bytes) override {
    out_.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    return static_cast<bool>(out_);
  }

 private:
  std::ofstream out_;
};

struct ReassembledTracks {
  SampleTrack audio{0.0, SampleUnit::NormalizedAudio, {}, 0.0};
  SampleTrack force{0.0, SampleUnit::Newtons, {}, 0.0};
  std::size_t audio_frames = 0;
  std::size_t force_frames = 0;
};

// Decodes a byte stream of frames, checking per-channel seq continuity and
// rate consistency.
inline ReassembledTracks reassemble(std::span<const std::uint8_t> bytes) {
  ReassembledTracks out;
  std::optional<std::uint32_t> next_seq[2];
  std::size_t at = 0;
  while (at < bytes.size()) {
    std::size_t used = 0;
    Frame f = decode_frame(bytes.subspan(at), &used);
    at += used;
    const auto ch = static_cast<std::size_t>(f.channel);
    const std::uint32_t expected = next_seq[ch].value_or(0);
    if (f.seq != expected) {
      throw Error(ErrorCode::FormatError, "seq gap on channel " + std::to_string(ch) + ": expected " +
                                              std::to_string(expected) + ", got " + std::to_string(f.seq));
    }
    next_seq[ch] = f.seq + 1;
    SampleTrack& track = f.channel == Channel::Audio ? out.audio : out.force;
    if (track.rate_hz == 0.0) {
      track.rate_hz = f.rate_hz;
    } else if (track.rate_hz != f.rate_hz) {
      throw Error(ErrorCode::FormatError, "rate changed mid-stream");
    }
    for (float s : f.samples) track.samples.push_back(static_cast<double>(s));
    (f.channel == Channel::Audio ? out.audio_frames : out.force_frames)++;
  }
  return out;
}

struct StreamOptions {
  double frame_ms = 1.0;
  // Hold each frame until its real-time deadline.
  bool paced = false;
  // Paced frames emitted later than this past their deadline count as late.
  std::chrono::microseconds late_threshold{1000};
  // 0 writes synchronously; otherwise frames pass through a bounded queue
  // drained by a consumer thread and the producer blocks while it is full.
  std::size_t max_in_flight = 0;
};

struct StreamSummary {
  std::size_t audio_frames = 0;
  std::size_t force_frames = 0;
  std::size_t total_bytes = 0;
  std::size_t late_frames = 0;
  std::chrono::steady_clock::time_point started;
};

// Quantizes samples to the 32-bit floats the wire carries.
inline SampleTrack to_wire_precision(SampleTrack track) {
  for (auto& s : track.samples) s = static_cast<double>(static_cast<float>(s));
  return track;
}

namespace detail {

struct PendingFrame {
  Channel channel;
  std::uint32_t seq;
  std::vector<std::uint8_t> bytes;
};

// Single-producer/single-consumer bounded queue in front of a sink.
class BoundedForwarder {
 public:
  BoundedForwarder(ByteSink& sink, std::size_t capacity)
      : sink_(sink), capacity_(capacity), worker_([this] { run(); }) {}

  ~BoundedForwarder() { finish(); }

  // Blocks while full. Returns false once the downstream sink has closed.
  bool push(PendingFrame frame) {
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [&] { return queue_.size() < capacity_ || failed_; });
    if (failed_) return false;
    queue_.push_back(std::move(frame));
    not_empty_.notify_one();
    return true;
  }

  void finish() {
    {
      std::lock_guard lock(mu_);
      if (done_) return;
      done_ = true;
    }
    not_empty_.notify_one();
    if (worker_.joinable()) worker_.join();
  }

  bool failed() {
    std::lock_guard lock(mu_);
    return failed_;
  }
  std::optional<std::uint32_t> last_ack(Channel ch) {
    std::lock_guard lock(mu_);
    return last_ack_[static_cast<std::size_t>(ch)];
  }

 private:
  void run() {
    for (;;) {
      PendingFrame frame;
      {
        std::unique_lock lock(mu_);
        not_empty_.wait(lock, [&] { return !queue_.empty() || done_; });
        if (queue_.empty()) return;
        frame = std::move(queue_.front());
        queue_.pop_front();
      }
      const bool ok = sink_.write(frame.bytes);
      std::lock_guard lock(mu_);
      if (!ok) {
        failed_ = true;
        queue_.clear();
        not_full_.notify_all();
        return;
      }
      last_ack_[static_cast<std::size_t>(frame.channel)] = frame.seq;
      not_full_.notify_all();
    }
  }

  ByteSink& sink_;
  std::size_t capacity_;
  std::mutex mu_;
  std::condition_variable not_full_;
  std::condition_variable not_empty_;
  std::deque<PendingFrame> queue_;
  bool done_ = false;
  bool failed_ = false;
  std::optional<std::uint32_t> last_ack_[2];
  std::thread worker_;
};

struct ChannelCursor {
  const SampleTrack* track;
  Channel channel;
  std::size_t per_frame;
  std::size_t next_begin = 0;
  std::uint32_t seq = 0;

  bool done() const { return next_begin >= track->samples.size(); }
  double time() const { return track->time_of(next_begin); }
};

}  // namespace detail

// Chunks both tracks into frames of `frame_ms` and sends them in timestamp
// order, the force frame first when both start at the same instant.
inline StreamSummary stream_tracks(const SampleTrack& audio, const SampleTrack& force,
                                   ByteSink& sink, const StreamOptions& opts = {}) {
  if (!(opts.frame_ms > 0.0)) throw Error(ErrorCode::InvalidArgument, "frame_ms must be > 0");
  for (const SampleTrack* t : {&audio, &force}) {
    if (!(t->rate_hz > 0.0) || t->rate_hz != std::floor(t->rate_hz) || t->rate_hz > 4294967295.0) {
      throw Error(ErrorCode::InvalidArgument, "stream rates must be positive integers");
    }
    for (double s : t->samples) {
      if (!std::isfinite(static_cast<float>(s))) {
        throw Error(ErrorCode::NonFiniteSample, "track sample not representable as finite f32");
      }
    }
  }
  auto per_frame = [&](const SampleTrack& t) {
    const auto n = static_cast<std::size_t>(std::floor(opts.frame_ms * t.rate_hz / 1000.0 + 0.5));
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "frame_ms shorter than one sample");
    return n;
  };
  detail::ChannelCursor cursors[2] = {{&force, Channel::Force, per_frame(force)},
                                      {&audio, Channel::Audio, per_frame(audio)}};

  StreamSummary summary;
  summary.started = std::chrono::steady_clock::now();
  const double t_origin = std::min(audio.start_s, force.start_s);

  std::optional<detail::BoundedForwarder> forwarder;
  if (opts.max_in_flight > 0) forwarder.emplace(sink, opts.max_in_flight);
  std::optional<std::uint32_t> acked[2];
  auto closed = [&]() -> SinkClosedError {
    if (forwarder) {
      forwarder->finish();
      return SinkClosedError(forwarder->last_ack(Channel::Audio), forwarder->last_ack(Channel::Force));
    }
    return SinkClosedError(acked[static_cast<std::size_t>(Channel::Audio)],
                           acked[static_cast<std::size_t>(Channel::Force)]);
  };

  for (;;) {
    detail::ChannelCursor* next = nullptr;
    for (auto& c : cursors) {
      if (c.done()) continue;
      // Strict comparison keeps the force cursor (listed first) on ties.
      if (!next || c.time() < next->time() - 1e-12) next = &c;
    }
    if (!next) break;

    const std::size_t end = std::min(next->next_begin + next->per_frame, next->track->samples.size());
    Frame f;
    f.channel = next->channel;
    f.seq = next->seq;
    f.rate_hz = static_cast<std::uint32_t>(next->track->rate_hz);
    f.samples.reserve(end - next->next_begin);
    for (std::size_t i = next->next_begin; i < end; ++i) {
      f.samples.push_back(static_cast<float>(next->track->samples[i]));
    }
    std::vector<std::uint8_t> bytes = encode_frame(f);

    if (opts.paced) {
      const auto offset = std::chrono::duration<double>(next->time() - t_origin);
      const auto deadline =
          summary.started + std::chrono::duration_cast<std::chrono::steady_clock::duration>(offset);
      std::this_thread::sleep_until(deadline);
      if (std::chrono::steady_clock::now() - deadline > opts.late_threshold) ++summary.late_frames;
    }

    const std::size_t n_bytes = bytes.size();
    if (forwarder) {
      if (!forwarder->push({f.channel, f.seq, std::move(bytes)})) throw closed();
    } else {
      if (!sink.write(bytes)) throw closed();
      acked[static_cast<std::size_t>(f.channel)] = f.seq;
    }
    summary.total_bytes += n_bytes;
    (f.channel == Channel::Audio ? summary.audio_frames : summary.force_frames)++;
    next->next_begin = end;
    ++next->seq;
  }
  if (forwarder) {
    forwarder->finish();
    if (forwarder->failed()) throw closed();
  }
  return summary;
}

}  // namespace grainforce
