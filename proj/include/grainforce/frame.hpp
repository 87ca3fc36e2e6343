#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "grainforce/error.hpp"

namespace grainforce {

// Wire layout (little-endian, no padding):
//   "GRN1" | channel:u8 | seq:u32 | rate_hz:u32 | n_samples:u32 | n_samples x f32
enum class Channel : std::uint8_t { Audio = 0, Force = 1 };

inline constexpr std::size_t kFrameHeaderBytes = 17;
inline constexpr char kFrameMagic[4] = {'G', 'R', 'N', '1'};

struct Frame {
  Channel channel = Channel::Audio;
  std::uint32_t seq = 0;
  std::uint32_t rate_hz = 0;
  std::vector<float> samples;

  friend bool operator==(const Frame& a, const Frame& b) {
    return a.channel == b.channel && a.seq == b.seq && a.rate_hz == b.rate_hz &&
           a.samples.size() == b.samples.size() &&
           std::memcmp(a.samples.data(), b.samples.data(), a.samples.size() * sizeof(float)) == 0;
  }
};

inline std::size_t encoded_size(const Frame& f) { return kFrameHeaderBytes + 4 * f.samples.size(); }

namespace detail {

inline void store_u32(std::uint8_t* out, std::uint32_t v) {
  out[0] = static_cast<std::uint8_t>(v);
  out[1] = static_cast<std::uint8_t>(v >> 8);
  out[2] = static_cast<std::uint8_t>(v >> 16);
  out[3] = static_cast<std::uint8_t>(v >> 24);
}

inline std::uint32_t load_u32(const std::uint8_t* in) {
  return std::uint32_t{in[0]} | (std::uint32_t{in[1]} << 8) | (std::uint32_t{in[2]} << 16) |
         (std::uint32_t{in[3]} << 24);
}

}  // namespace detail

inline void encode_frame_into(const Frame& f, std::vector<std::uint8_t>& out) {
  const std::size_t at = out.size();
  out.resize(at + encoded_size(f));
  std::uint8_t* p = out.data() + at;
  std::memcpy(p, kFrameMagic, 4);
  p[4] = static_cast<std::uint8_t>(f.channel);
  detail::store_u32(p + 5, f.seq);
  detail::store_u32(p + 9, f.rate_hz);
  detail::store_u32(p + 13, static_cast<std::uint32_t>(f.samples.size()));
  p += kFrameHeaderBytes;
  for (float s : f.samples) {
    std::uint32_t bits = 0;
    std::memcpy(&bits, &s, 4);
    detail::store_u32(p, bits);
    p += 4;
  }
}

inline std::vector<std::uint8_t> encode_frame(const Frame& f) {
  std::vector<std::uint8_t> out;
  out.reserve(encoded_size(f));
  encode_frame_into(f, out);
  return out;
}

// Decodes the frame at the front of `bytes`; `consumed` receives its length.
inline Frame decode_frame(std::span<const std::uint8_t> bytes, std::size_t* consumed = nullptr) {
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kFrameMagic, 4) != 0) {
    throw Error(ErrorCode::BadMagic, "frame does not start with GRN1");
  }
  if (bytes.size() < kFrameHeaderBytes) {
    throw Error(ErrorCode::TruncatedFrame, "frame header needs 17 bytes, have " +
                                               std::to_string(bytes.size()));
  }
  Frame f;
  const std::uint8_t channel = bytes[4];
  if (channel > 1) throw Error(ErrorCode::FormatError, "unknown channel " + std::to_string(channel));
  f.channel = static_cast<Channel>(channel);
  f.seq = detail::load_u32(bytes.data() + 5);
  f.rate_hz = detail::load_u32(bytes.data() + 9);
  const std::uint32_t n = detail::load_u32(bytes.data() + 13);
  if (n == 0) throw Error(ErrorCode::FormatError, "frame carries no samples");
  const std::size_t need = kFrameHeaderBytes + std::size_t{n} * 4;
  if (bytes.size() < need) {
    throw Error(ErrorCode::TruncatedFrame, "declared " + std::to_string(n) + " samples need " +
                                               std::to_string(need) + " bytes, have " +
                                               std::to_string(bytes.size()));
  }
  f.samples.resize(n);
  const std::uint8_t* p = bytes.data() + kFrameHeaderBytes;
  for (std::uint32_t i = 0; i < n; ++i, p += 4) {
    const std::uint32_t bits = detail::load_u32(p);
    std::memcpy(&f.samples[i], &bits, 4);
    if (!std::isfinite(f.samples[i])) {
      throw Error(ErrorCode::NonFiniteSample, "sample " + std::to_string(i) + " is not finite");
    }
  }
  if (consumed) *consumed = need;
  return f;
}

}  // namespace grainforce
