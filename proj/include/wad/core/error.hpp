#pragma once

#include <stdexcept>
#include <string>

namespace wad {

enum class ErrorCode {
  bad_argument,
  dimension_mismatch,
  non_finite,
  missing_cache,
  checkpoint_version,
  checkpoint_corrupt,
  unknown_parameter,
  off_map,
  unreachable,
  capacity,
  io,
  diverged,
  frozen_violation,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::bad_argument: return "bad_argument";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::non_finite: return "non_finite";
    case ErrorCode::missing_cache: return "missing_cache";
    case ErrorCode::checkpoint_version: return "checkpoint_version";
    case ErrorCode::checkpoint_corrupt: return "checkpoint_corrupt";
    case ErrorCode::unknown_parameter: return "unknown_parameter";
    case ErrorCode::off_map: return "off_map";
    case ErrorCode::unreachable: return "unreachable";
    case ErrorCode::capacity: return "capacity";
    case ErrorCode::io: return "io";
    case ErrorCode::diverged: return "diverged";
    case ErrorCode::frozen_violation: return "frozen_violation";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(std::string(to_string(code)) + ": " + msg), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace wad
