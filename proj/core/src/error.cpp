#include "qcollapse/error.hpp"

namespace qcollapse {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyState: return "EmptyState";
    case ErrorCode::SubsystemClash: return "SubsystemClash";
    case ErrorCode::ZeroNorm: return "ZeroNorm";
    case ErrorCode::ModeMissing: return "ModeMissing";
    case ErrorCode::ModeClash: return "ModeClash";
    case ErrorCode::InvalidCircuit: return "InvalidCircuit";
    case ErrorCode::BadPartition: return "BadPartition";
    case ErrorCode::ImpossibleOutcome: return "ImpossibleOutcome";
    case ErrorCode::BadOrdering: return "BadOrdering";
    case ErrorCode::BadWeights: return "BadWeights";
    case ErrorCode::ZeroIntensity: return "ZeroIntensity";
    case ErrorCode::UnsupportedTopology: return "UnsupportedTopology";
    case ErrorCode::InvalidChainState: return "InvalidChainState";
    case ErrorCode::PoolExhausted: return "PoolExhausted";
    case ErrorCode::NotMacroscopic: return "NotMacroscopic";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonPhysical: return "NonPhysical";
    case ErrorCode::MaxStepsExceeded: return "MaxStepsExceeded";
    case ErrorCode::UnknownScenario: return "UnknownScenario";
    case ErrorCode::UnknownParameter: return "UnknownParameter";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Format: return "Format";
  }
  return "Unknown";
}

}  // namespace qcollapse
