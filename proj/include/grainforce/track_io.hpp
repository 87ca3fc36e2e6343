#pragma once

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "grainforce/device_sim.hpp"
#include "grainforce/error.hpp"
#include "grainforce/signal_render.hpp"

namespace grainforce {

static_assert(std::endian::native == std::endian::little, "byte layout assumes a little-endian host");

// Shortest decimal text that round-trips the double.
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw Error(ErrorCode::FormatError, "cannot format number");
  return std::string(buf.data(), end);
}

inline double parse_double(std::string_view text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\t' || last[-1] == '\r')) --last;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    throw Error(ErrorCode::FormatError, "not a number: '" + std::string(text) + "'");
  }
  return v;
}

namespace detail {

inline void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<char>((v >> s) & 0xff));
}

inline std::uint32_t get_u32(std::string_view in, std::size_t at) {
  std::uint32_t v = 0;
  for (int b = 3; b >= 0; --b) v = (v << 8) | static_cast<unsigned char>(in[at + static_cast<std::size_t>(b)]);
  return v;
}

inline std::uint16_t get_u16(std::string_view in, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(in[at]) |
                                    (static_cast<unsigned char>(in[at + 1]) << 8));
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace detail

// RIFF/WAVE, IEEE float 32-bit mono. A LIST/INFO comment records the unit
// and start time as "unit=<unit>;start_s=<seconds>".
inline std::string encode_wav(const SampleTrack& track) {
  if (!(track.rate_hz >= 1.0) || track.rate_hz > 4294967295.0 ||
      track.rate_hz != std::floor(track.rate_hz)) {
    throw Error(ErrorCode::FormatError, "WAV needs an integral sample rate");
  }
  const auto rate = static_cast<std::uint32_t>(track.rate_hz);
  const auto n = static_cast<std::uint32_t>(track.samples.size());

  std::string comment = "unit=" + std::string(to_string(track.unit)) +
                        ";start_s=" + format_double(track.start_s);
  comment.push_back('\0');
  if (comment.size() % 2) comment.push_back('\0');

  std::string info = "INFO";
  info += "ICMT";
  detail::put_u32(info, static_cast<std::uint32_t>(comment.size()));
  info += comment;

  std::string body = "WAVE";
  body += "fmt ";
  detail::put_u32(body, 18);
  detail::put_u16(body, 3);  // WAVE_FORMAT_IEEE_FLOAT
  detail::put_u16(body, 1);
  detail::put_u32(body, rate);
  detail::put_u32(body, rate * 4);
  detail::put_u16(body, 4);
  detail::put_u16(body, 32);
  detail::put_u16(body, 0);
  body += "fact";
  detail::put_u32(body, 4);
  detail::put_u32(body, n);
  body += "LIST";
  detail::put_u32(body, static_cast<std::uint32_t>(info.size()));
  body += info;
  body += "data";
  detail::put_u32(body, n * 4);
  const std::size_t data_at = body.size();
  body.resize(data_at + std::size_t{n} * 4);
  for (std::size_t i = 0; i < n; ++i) {
    const auto f = static_cast<float>(track.samples[i]);
    std::memcpy(body.data() + data_at + i * 4, &f, 4);
  }

  std::string out = "RIFF";
  detail::put_u32(out, static_cast<std::uint32_t>(body.size()));
  out += body;
  return out;
}

inline SampleTrack decode_wav(std::string_view bytes) {
  if (bytes.size() < 12 || bytes.substr(0, 4) != "RIFF" || bytes.substr(8, 4) != "WAVE") {
    throw Error(ErrorCode::FormatError, "not a RIFF/WAVE file");
  }
  SampleTrack track;
  bool have_fmt = false, have_data = false;
  std::size_t at = 12;
  while (at + 8 <= bytes.size()) {
    const auto id = bytes.substr(at, 4);
    const std::size_t size = detail::get_u32(bytes, at + 4);
    const std::size_t body = at + 8;
    if (body + size > bytes.size()) throw Error(ErrorCode::FormatError, "truncated WAV chunk");
    if (id == "fmt ") {
      if (size < 16) throw Error(ErrorCode::FormatError, "short fmt chunk");
      const auto format = detail::get_u16(bytes, body);
      const auto channels = detail::get_u16(bytes, body + 2);
      const auto bits = detail::get_u16(bytes, body + 14);
      if (format != 3 || channels != 1 || bits != 32) {
        throw Error(ErrorCode::FormatError, "only mono 32-bit float WAV is supported");
      }
      track.rate_hz = detail::get_u32(bytes, body + 4);
      have_fmt = true;
    } else if (id == "LIST" && size >= 4 && bytes.substr(body, 4) == "INFO") {
      std::size_t sub = body + 4;
      while (sub + 8 <= body + size) {
        const auto sub_id = bytes.substr(sub, 4);
        const std::size_t sub_size = detail::get_u32(bytes, sub + 4);
        if (sub + 8 + sub_size > body + size) break;
        if (sub_id == "ICMT") {
          std::string_view text = bytes.substr(sub + 8, sub_size);
          text = text.substr(0, text.find('\0'));
          while (!text.empty()) {
            const auto semi = text.find(';');
            const auto item = text.substr(0, semi);
            if (item == "unit=newtons") {
              track.unit = SampleUnit::Newtons;
            } else if (item == "unit=normalized") {
              track.unit = SampleUnit::NormalizedAudio;
            } else if (item.starts_with("start_s=")) {
              track.start_s = parse_double(item.substr(8));
            }
            if (semi == std::string_view::npos) break;
            text.remove_prefix(semi + 1);
          }
        }
        sub += 8 + sub_size + (sub_size % 2);
      }
    } else if (id == "data") {
      if (!have_fmt) throw Error(ErrorCode::FormatError, "data chunk before fmt chunk");
      track.samples.resize(size / 4);
      for (std::size_t i = 0; i < track.samples.size(); ++i) {
        float f = 0.0f;
        std::memcpy(&f, bytes.data() + body + i * 4, 4);
        track.samples[i] = static_cast<double>(f);
      }
      have_data = true;
    }
    at = body + size + (size % 2);
  }
  if (!have_fmt || !have_data) throw Error(ErrorCode::FormatError, "WAV lacks fmt or data chunk");
  return track;
}

inline void write_wav(const std::filesystem::path& path, const SampleTrack& track) {
  detail::write_file(path, encode_wav(track));
}

inline SampleTrack read_wav(const std::filesystem::path& path) {
  return decode_wav(detail::read_file(path));
}

inline std::string encode_force_csv(const SampleTrack& track) {
  std::string out = "time_s,force_n\n";
  out.reserve(out.size() + track.samples.size() * 24);
  for (std::size_t i = 0; i < track.samples.size(); ++i) {
    out += format_double(track.time_of(i));
    out += ',';
    out += format_double(track.samples[i]);
    out += '\n';
  }
  return out;
}

// Rate is recovered from the first two timestamps.
inline SampleTrack decode_force_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || (line != "time_s,force_n" && line != "time_s,force_n\r")) {
    throw Error(ErrorCode::FormatError, "expected header 'time_s,force_n'");
  }
  std::vector<double> times;
  SampleTrack track{kDefaultForceRateHz, SampleUnit::Newtons, {}, 0.0};
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::FormatError, "bad CSV row: " + line);
    times.push_back(parse_double(std::string_view(line).substr(0, comma)));
    track.samples.push_back(parse_double(std::string_view(line).substr(comma + 1)));
  }
  if (!times.empty()) track.start_s = times.front();
  if (times.size() >= 2) {
    const double period = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    if (!(period > 0.0)) throw Error(ErrorCode::FormatError, "timestamps must increase");
    track.rate_hz = std::round(1.0 / period * 1e6) / 1e6;
  }
  return track;
}

inline void write_force_csv(const std::filesystem::path& path, const SampleTrack& track) {
  detail::write_file(path, encode_force_csv(track));
}

inline SampleTrack read_force_csv(const std::filesystem::path& path) {
  return decode_force_csv(detail::read_file(path));
}

// Picks the reader from the file extension (.wav or .csv).
inline SampleTrack read_track(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".wav" || ext == ".WAV") return read_wav(path);
  if (ext == ".csv" || ext == ".CSV") return read_force_csv(path);
  throw Error(ErrorCode::FormatError, "unknown track file type: " + path.string());
}

inline std::string encode_trace_csv(const DeviceTrace& trace) {
  std::string out = "time_s,position_m,velocity_m_per_s,applied_force_n\n";
  out.reserve(out.size() + trace.size() * 64);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out += format_double(trace.time_s[i]);
    out += ',';
    out += format_double(trace.position_m[i]);
    out += ',';
    out += format_double(trace.velocity_m_per_s[i]);
    out += ',';
    out += format_double(trace.applied_force_n[i]);
    out += '\n';
  }
  return out;
}

inline void write_trace_csv(const std::filesystem::path& path, const DeviceTrace& trace) {
  detail::write_file(path, encode_trace_csv(trace));
}

}  // namespace grainforce
