#pragma once

#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "qcollapse/measurement.hpp"
#include "qcollapse/optics.hpp"
#include "qcollapse/statevec.hpp"

namespace qcollapse {

struct ApplyStep {
  OpticalElement element;
};

struct MeasureStep {
  ObservablePartition partition;
};

using OrderingStep = std::variant<ApplyStep, MeasureStep>;

/// The order in which one observer's time axis sees unitary elements and
/// detections. Frames differ only in this order; no kinematics is involved.
struct MeasurementOrdering {
  std::string name;
  std::vector<OrderingStep> steps;
};

/// Subsystem name -> outcome label the run is conditioned on.
using ConditionedOutcomes = std::map<std::string, std::string>;

struct OrderedSnapshot {
  std::string step;      // human-readable step description
  Ket state;             // conditional state after the step
  double probability;    // probability of the conditioning path so far
};

struct OrderedEvolution {
  Ket final_state;
  double probability = 1.0;
  std::vector<OrderedSnapshot> snapshots;
};

OrderedEvolution evolve_ordered(const Ket& initial, const MeasurementOrdering& ordering,
                                const ConditionedOutcomes& outcomes);

inline constexpr double kForcedTolerance = 1e-10;

struct RetrodictionReport {
  /// Per ordering: single-factor labels the unmeasured particles are forced
  /// into (conditional probability 1) while still on their initial modes.
  std::map<std::string, std::set<BasisLabel>> forced_support;
  std::set<BasisLabel> joint_required;
  std::set<BasisLabel> missing_from_initial;
  bool contradiction = false;
};

RetrodictionReport retrodiction_report(const Ket& initial,
                                       const std::vector<MeasurementOrdering>& orderings,
                                       const ConditionedOutcomes& outcomes);

namespace setups {

enum class HardyOrdering { Lab, FramePlus, FrameMinus };

/// Both particles measured in {c, d} after their splitters, in the order a
/// lab observer or an observer in one of the two moving frames records.
MeasurementOrdering hardy_ordering(HardyOrdering which);
ObservablePartition hardy_detectors(const std::string& particle);

}  // namespace setups

}  // namespace qcollapse
