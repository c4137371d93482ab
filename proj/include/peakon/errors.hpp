#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace peakon {

/// Named failure kinds shared by the whole library. The CLI maps any of these
/// to exit status 1 and prints the name.
enum class ErrorCode {
  InvalidPair,
  DuplicatePosition,
  NonPythagoreanPeriod,
  NotRealRooted,
  PoleStructure,
  PoleHit,
  InternalInconsistency,
  NotAdmissible,
  InconsistentBaseMass,
  BadNormalization,
  CriticalValueInsideBand,
  DivisorOffTorus,
  NegativeUpsilonA,
  NonpositiveGamma,
};

constexpr std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidPair: return "InvalidPair";
    case ErrorCode::DuplicatePosition: return "DuplicatePosition";
    case ErrorCode::NonPythagoreanPeriod: return "NonPythagoreanPeriod";
    case ErrorCode::NotRealRooted: return "NotRealRooted";
    case ErrorCode::PoleStructure: return "PoleStructure";
    case ErrorCode::PoleHit: return "PoleHit";
    case ErrorCode::InternalInconsistency: return "InternalInconsistency";
    case ErrorCode::NotAdmissible: return "NotAdmissible";
    case ErrorCode::InconsistentBaseMass: return "InconsistentBaseMass";
    case ErrorCode::BadNormalization: return "BadNormalization";
    case ErrorCode::CriticalValueInsideBand: return "CriticalValueInsideBand";
    case ErrorCode::DivisorOffTorus: return "DivisorOffTorus";
    case ErrorCode::NegativeUpsilonA: return "NegativeUpsilonA";
    case ErrorCode::NonpositiveGamma: return "NonpositiveGamma";
  }
  return "Unknown";
}

class SpectralError : public std::runtime_error {
 public:
  SpectralError(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_name(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& detail) {
  throw SpectralError(code, detail);
}

}  // namespace peakon
