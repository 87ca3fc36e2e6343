#include <gtest/gtest.h>

#include <chrono>
#include <random>

#include "grainforce/stream.hpp"

namespace gf = grainforce;

namespace {

gf::RenderedTracks three_second_tracks() {
  gf::GrainSpec g;
  g.force_mode = gf::ForceMode::Sine;
  g.duration_ms = 50.0;
  g.force_amplitude_n = 0.72;
  return gf::render_tracks(gf::make_periodic_schedule(3, 1.0, g, 0.14), 48000.0, 8000.0, 3.0);
}

// Accepts `limit` writes and then reports itself closed.
class ClosingSink : public gf::ByteSink {
 public:
  explicit ClosingSink(std::size_t limit) : limit_(limit) {}
  bool write(std::span<const std::uint8_t> bytes) override {
    if (writes_ == limit_) return false;
    ++writes_;
    got_.insert(got_.end(), bytes.begin(), bytes.end());
    return true;
  }
  std::size_t writes_ = 0;
  std::vector<std::uint8_t> got_;

 private:
  std::size_t limit_;
};

// Records the time of every write relative to construction.
class ClockSink : public gf::ByteSink {
 public:
  bool write(std::span<const std::uint8_t> bytes) override {
    std::size_t used = 0;
    const auto f = gf::decode_frame(bytes, &used);
    stamps.push_back({f.channel, f.seq, std::chrono::steady_clock::now()});
    return true;
  }
  struct Stamp {
    gf::Channel channel;
    std::uint32_t seq;
    std::chrono::steady_clock::time_point at;
  };
  std::vector<Stamp> stamps;
};

}  // namespace

TEST(Stream, FrameCountsAndLoopbackExactness) {
  const auto r = three_second_tracks();
  for (std::size_t in_flight : {0u, 4u}) {
    gf::LoopbackSink sink;
    gf::StreamOptions opts;
    opts.frame_ms = 10.0;
    opts.max_in_flight = in_flight;
    const auto s = gf::stream_tracks(r.audio, r.force, sink, opts);
    EXPECT_EQ(s.audio_frames, 300u);
    EXPECT_EQ(s.force_frames, 300u);
    EXPECT_EQ(s.total_bytes, sink.bytes().size());
    EXPECT_EQ(s.total_bytes, 600 * 17 + 4 * (r.audio.size() + r.force.size()));
    const auto back = gf::reassemble(sink.bytes());
    EXPECT_EQ(back.audio.samples, gf::to_wire_precision(r.audio).samples);
    EXPECT_EQ(back.force.samples, gf::to_wire_precision(r.force).samples);
    EXPECT_EQ(back.audio.rate_hz, 48000.0);
    EXPECT_EQ(back.force.rate_hz, 8000.0);
  }
}

TEST(Stream, ForceFirstOnTiesThenTimestampOrder) {
  const auto r = three_second_tracks();
  ClockSink sink;
  gf::StreamOptions opts;
  opts.frame_ms = 10.0;
  gf::stream_tracks(r.audio, r.force, sink, opts);
  ASSERT_EQ(sink.stamps.size(), 600u);
  for (std::size_t i = 0; i < sink.stamps.size(); ++i) {
    EXPECT_EQ(sink.stamps[i].channel, i % 2 == 0 ? gf::Channel::Force : gf::Channel::Audio);
    EXPECT_EQ(sink.stamps[i].seq, i / 2);
  }
}

TEST(Stream, ClosedSinkReportsLastAcknowledgedSeq) {
  const auto r = three_second_tracks();
  for (std::size_t in_flight : {0u, 3u}) {
    ClosingSink sink(12);
    gf::StreamOptions opts;
    opts.frame_ms = 10.0;
    opts.max_in_flight = in_flight;
    try {
      gf::stream_tracks(r.audio, r.force, sink, opts);
      FAIL();
    } catch (const gf::SinkClosedError& e) {
      EXPECT_EQ(e.code(), gf::ErrorCode::SinkClosed);
      EXPECT_EQ(e.last_seq(), 5u);
      EXPECT_EQ(e.last_audio_seq(), 5u);
      EXPECT_EQ(e.last_force_seq(), 5u);
    }
    EXPECT_EQ(sink.writes_, 12u);
    // What did arrive is a clean prefix.
    const auto back = gf::reassemble(sink.got_);
    EXPECT_EQ(back.audio_frames, 6u);
  }
}

TEST(Stream, PacedModeNeverEarly) {
  gf::SampleTrack audio{48000.0, gf::SampleUnit::NormalizedAudio, std::vector<double>(9600, 0.1), 0.0};
  gf::SampleTrack force{8000.0, gf::SampleUnit::Newtons, std::vector<double>(1600, 0.14), 0.0};
  ClockSink sink;
  gf::StreamOptions opts;
  opts.frame_ms = 10.0;
  opts.paced = true;
  const auto s = gf::stream_tracks(audio, force, sink, opts);
  ASSERT_EQ(sink.stamps.size(), 40u);
  for (const auto& st : sink.stamps) {
    const auto deadline = s.started + std::chrono::milliseconds(10 * st.seq);
    EXPECT_GE(st.at, deadline);
  }
  EXPECT_GE(sink.stamps.back().at - s.started, std::chrono::milliseconds(190));
}

TEST(Stream, PartialLastFrame) {
  gf::SampleTrack audio{1000.0, gf::SampleUnit::NormalizedAudio, std::vector<double>(25, 0.5), 0.0};
  gf::SampleTrack force{1000.0, gf::SampleUnit::Newtons, std::vector<double>(25, 0.5), 0.0};
  gf::LoopbackSink sink;
  gf::StreamOptions opts;
  opts.frame_ms = 10.0;
  const auto s = gf::stream_tracks(audio, force, sink, opts);
  EXPECT_EQ(s.audio_frames, 3u);
  EXPECT_EQ(gf::reassemble(sink.bytes()).audio.samples.size(), 25u);
}

TEST(Stream, RejectsBadInput) {
  gf::SampleTrack audio{48000.0, gf::SampleUnit::NormalizedAudio, {0.0}, 0.0};
  gf::SampleTrack force{8000.5, gf::SampleUnit::Newtons, {0.0}, 0.0};
  gf::LoopbackSink sink;
  EXPECT_THROW(gf::stream_tracks(audio, force, sink), gf::Error);
  force.rate_hz = 8000.0;
  force.samples[0] = 1e300;
  EXPECT_THROW(gf::stream_tracks(audio, force, sink), gf::Error);
  EXPECT_TRUE(sink.bytes().empty());
}

TEST(Reassemble, DetectsSeqGap) {
  std::vector<std::uint8_t> bytes;
  gf::encode_frame_into({gf::Channel::Audio, 0, 48000, {0.1f}}, bytes);
  gf::encode_frame_into({gf::Channel::Audio, 2, 48000, {0.1f}}, bytes);
  EXPECT_THROW(gf::reassemble(bytes), gf::Error);
}
