#pragma once

#include <stdexcept>
#include <string>

namespace sysid {

enum class ErrorCode {
  RankDeficient,
  NoConvergence,
  DimensionMismatch,
  NonFiniteState,
  InfeasibleTargets,
  EmptyMiddleSet,
  InsufficientRetained,
  ConfigError,
  IoError,
};

// All library failures carry a code so the CLI can map them to exit codes
// (config/io -> 2, numerical -> 3).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::InfeasibleTargets: return "InfeasibleTargets";
    case ErrorCode::EmptyMiddleSet: return "EmptyMiddleSet";
    case ErrorCode::InsufficientRetained: return "InsufficientRetained";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace sysid
