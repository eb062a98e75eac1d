#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qcollapse {

enum class ErrorCode {
  EmptyState,
  SubsystemClash,
  ZeroNorm,
  ModeMissing,
  ModeClash,
  InvalidCircuit,
  BadPartition,
  ImpossibleOutcome,
  BadOrdering,
  BadWeights,
  ZeroIntensity,
  UnsupportedTopology,
  InvalidChainState,
  PoolExhausted,
  NotMacroscopic,
  InvalidArgument,
  NonPhysical,
  MaxStepsExceeded,
  UnknownScenario,
  UnknownParameter,
  Io,
  Format,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library; callers branch on `code()`.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace qcollapse
