#include <gtest/gtest.h>

#include <random>

#include "grainforce/track_io.hpp"

namespace gf = grainforce;

namespace {

gf::SampleTrack random_track(std::mt19937_64& rng, gf::SampleUnit unit, double rate) {
  std::uniform_real_distribution<double> v(-1.0, 1.0);
  gf::SampleTrack t{rate, unit, {}, 0.0};
  t.samples.resize(1 + rng() % 500);
  for (auto& s : t.samples) s = static_cast<double>(static_cast<float>(v(rng)));
  t.start_s = static_cast<double>(rng() % 1000) / 997.0;
  return t;
}

}  // namespace

TEST(Wav, RoundTripKeepsSamplesUnitAndStart) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto unit = i % 2 ? gf::SampleUnit::Newtons : gf::SampleUnit::NormalizedAudio;
    const auto t = random_track(rng, unit, i % 2 ? 8000.0 : 48000.0);
    const auto back = gf::decode_wav(gf::encode_wav(t));
    EXPECT_EQ(back.rate_hz, t.rate_hz);
    EXPECT_EQ(back.unit, t.unit);
    EXPECT_EQ(back.start_s, t.start_s);
    EXPECT_EQ(back.samples, t.samples);
  }
}

TEST(Wav, HeaderIsFloatMono) {
  gf::SampleTrack t{48000.0, gf::SampleUnit::NormalizedAudio, {0.5, -0.5}, 0.0};
  const auto bytes = gf::encode_wav(t);
  ASSERT_GE(bytes.size(), 44u);
  EXPECT_EQ(bytes.substr(0, 4), "RIFF");
  EXPECT_EQ(bytes.substr(8, 4), "WAVE");
  EXPECT_EQ(gf::detail::get_u32(bytes, 4), bytes.size() - 8);
  EXPECT_EQ(bytes.substr(12, 4), "fmt ");
  EXPECT_EQ(gf::detail::get_u16(bytes, 20), 3u);  // IEEE float
  EXPECT_EQ(gf::detail::get_u16(bytes, 22), 1u);
  EXPECT_EQ(gf::detail::get_u32(bytes, 24), 48000u);
  EXPECT_EQ(gf::detail::get_u16(bytes, 34), 32u);
}

TEST(Wav, RejectsGarbage) {
  EXPECT_THROW(gf::decode_wav("not a wav file at all, nope"), gf::Error);
  gf::SampleTrack t{8000.0, gf::SampleUnit::Newtons, {0.1, 0.2}, 0.0};
  auto bytes = gf::encode_wav(t);
  EXPECT_THROW(gf::decode_wav(std::string_view(bytes).substr(0, bytes.size() - 6)), gf::Error);
}

TEST(ForceCsv, RoundTripIsExact) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> v(0.0, 1.2);
  gf::SampleTrack t{8000.0, gf::SampleUnit::Newtons, {}, 0.25};
  for (int i = 0; i < 800; ++i) t.samples.push_back(v(rng));
  const auto text = gf::encode_force_csv(t);
  EXPECT_EQ(text.substr(0, text.find('\n')), "time_s,force_n");
  const auto back = gf::decode_force_csv(text);
  EXPECT_EQ(back.samples, t.samples);
  EXPECT_DOUBLE_EQ(back.rate_hz, 8000.0);
  EXPECT_NEAR(back.start_s, 0.25, 1e-12);
  EXPECT_EQ(back.unit, gf::SampleUnit::Newtons);
}

TEST(ForceCsv, Malformed) {
  EXPECT_THROW(gf::decode_force_csv("time,force\n0,1\n"), gf::Error);
  EXPECT_THROW(gf::decode_force_csv("time_s,force_n\n0,abc\n0.1,1\n"), gf::Error);
}

TEST(TraceCsv, HeaderAndRows) {
  gf::DeviceTrace tr;
  tr.push(0.0, 0.0, 0.1, 0.0);
  tr.push(0.000125, 1.25e-5, 0.1, 0.5);
  const auto text = gf::encode_trace_csv(tr);
  EXPECT_EQ(text, "time_s,position_m,velocity_m_per_s,applied_force_n\n0,0,0.1,0\n0.000125,1.25e-05,0.1,0.5\n");
}

TEST(Numbers, ShortestRoundTrip) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> v(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = v(rng);
    EXPECT_EQ(gf::parse_double(gf::format_double(x)), x);
  }
  EXPECT_THROW(gf::parse_double("1.5x"), gf::Error);
}
