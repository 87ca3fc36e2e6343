#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace grainforce {

enum class ErrorCode {
  DurationOutOfRange,
  NegativeAmplitude,
  NonPositiveFrequency,
  OverlapError,
  InvalidSchedule,
  UnderSampledCarrier,
  CycleFitError,
  InvalidArgument,
  NegativeEmissionTime,
  SilentTrack,
  UnstableIntegration,
  ExcludedCondition,
  BadMagic,
  TruncatedFrame,
  NonFiniteSample,
  SinkClosed,
  FormatError,
  IoError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DurationOutOfRange: return "DurationOutOfRange";
    case ErrorCode::NegativeAmplitude: return "NegativeAmplitude";
    case ErrorCode::NonPositiveFrequency: return "NonPositiveFrequency";
    case ErrorCode::OverlapError: return "OverlapError";
    case ErrorCode::InvalidSchedule: return "InvalidSchedule";
    case ErrorCode::UnderSampledCarrier: return "UnderSampledCarrier";
    case ErrorCode::CycleFitError: return "CycleFitError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NegativeEmissionTime: return "NegativeEmissionTime";
    case ErrorCode::SilentTrack: return "SilentTrack";
    case ErrorCode::UnstableIntegration: return "UnstableIntegration";
    case ErrorCode::ExcludedCondition: return "ExcludedCondition";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedFrame: return "TruncatedFrame";
    case ErrorCode::NonFiniteSample: return "NonFiniteSample";
    case ErrorCode::SinkClosed: return "SinkClosed";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

// Every failure in the library is reported through this type. Errors raised
// while processing one grain of a schedule carry that grain's index.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Error(ErrorCode code, const std::string& what, std::size_t grain_index)
      : std::runtime_error(std::string(to_string(code)) + ": grain " +
                           std::to_string(grain_index) + ": " + what),
        code_(code),
        grain_index_(grain_index) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> grain_index() const noexcept { return grain_index_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> grain_index_;
};

}  // namespace grainforce
