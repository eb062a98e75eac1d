#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>

#include "qcollapse/rng.hpp"
#include "qcollapse/statevec.hpp"

namespace qcollapse {

/// Projective measurement on one subsystem: each outcome owns a set of modes.
/// Classes must be disjoint and cover every mode the measured ket occupies.
struct ObservablePartition {
  std::string subsystem;
  std::map<std::string, std::set<std::string>> outcome_classes;

  /// One outcome per mode, labelled by the mode name.
  static ObservablePartition per_mode(const std::string& subsystem,
                                      const std::set<std::string>& modes);
};

enum class CollapsePolicy { Collapse, UnitaryOnly };

std::string_view to_string(CollapsePolicy policy) noexcept;

struct MeasurementOutcome {
  std::string label;
  double probability = 0.0;
  /// Lueders state under Collapse, the untouched input under UnitaryOnly.
  Ket post_state;
};

/// Born probability of every outcome, keyed by outcome label.
std::map<std::string, double> born_probabilities(const Ket& k, const ObservablePartition& p);

/// Joint probabilities for a product of single-subsystem partitions. Outcome
/// labels are the factor labels joined with ',' in partition order.
std::map<std::string, double> born_probabilities(const Ket& k,
                                                 std::span<const ObservablePartition> parts);

/// Projection onto the outcome class without renormalization.
Ket project(const Ket& k, const ObservablePartition& p, const std::string& outcome);

/// Lueders rule: normalized projection onto the outcome class.
Ket collapse(const Ket& k, const ObservablePartition& p, const std::string& outcome);

/// Born draw by inverse CDF over outcome labels in lexicographic order.
MeasurementOutcome sample(const Ket& k, const ObservablePartition& p, CollapsePolicy policy,
                          RngStream& rng);

/// Conditions the joint ket on `outcome` of `subsystem`. When the outcome
/// class pins the subsystem to a single mode, that factor is removed and the
/// normalized state of the remaining subsystems is returned; otherwise the
/// normalized projected joint state is returned.
Ket conditional_state(const Ket& k, const std::string& subsystem, const ObservablePartition& p,
                      const std::string& outcome);

/// Probability that `subsystem` sits in each of its modes.
std::map<std::string, double> mode_marginals(const Ket& k, const std::string& subsystem);

}  // namespace qcollapse
