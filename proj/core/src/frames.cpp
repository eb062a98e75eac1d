#include "qcollapse/frames.hpp"

#include "qcollapse/error.hpp"

namespace qcollapse {

namespace {

std::string describe(const OpticalElement& e) {
  return std::visit(
      [](const auto& el) -> std::string {
        using T = std::decay_t<decltype(el)>;
        if constexpr (std::is_same_v<T, BeamSplitter>) {
          return "splitter(" + el.subsystem + ")";
        } else if constexpr (std::is_same_v<T, PhaseShifter>) {
          return "phase(" + el.subsystem + ":" + el.mode + ")";
        } else {
          return "mirror(" + el.subsystem + ":" + el.from + "->" + el.to + ")";
        }
      },
      e);
}

void check_ordering(const MeasurementOrdering& ordering) {
  std::set<std::string> measured;
  for (const auto& step : ordering.steps) {
    if (const auto* m = std::get_if<MeasureStep>(&step)) {
      if (!measured.insert(m->partition.subsystem).second) {
        throw Error(ErrorCode::BadOrdering, "ordering '" + ordering.name + "' measures '" +
                                                m->partition.subsystem + "' twice");
      }
    }
  }
}

// Enumerates every label that picks at most one forced mode per subsystem,
// skipping the empty label.
void combine(const std::vector<std::pair<std::string, std::vector<std::string>>>& groups,
             std::size_t index, std::vector<Factor>& current, std::set<BasisLabel>& out) {
  if (index == groups.size()) {
    if (!current.empty()) out.insert(BasisLabel(current));
    return;
  }
  combine(groups, index + 1, current, out);
  for (const auto& mode : groups[index].second) {
    current.push_back({groups[index].first, mode});
    combine(groups, index + 1, current, out);
    current.pop_back();
  }
}

}  // namespace

OrderedEvolution evolve_ordered(const Ket& initial, const MeasurementOrdering& ordering,
                                const ConditionedOutcomes& outcomes) {
  check_ordering(ordering);
  OrderedEvolution result{initial, 1.0, {}};
  for (const auto& step : ordering.steps) {
    if (const auto* a = std::get_if<ApplyStep>(&step)) {
      result.final_state = apply_element(result.final_state, a->element);
      result.snapshots.push_back({describe(a->element), result.final_state, result.probability});
      continue;
    }
    const auto& partition = std::get<MeasureStep>(step).partition;
    auto it = outcomes.find(partition.subsystem);
    if (it == outcomes.end()) {
      throw Error(ErrorCode::BadOrdering, "no conditioned outcome for '" + partition.subsystem +
                                              "' in ordering '" + ordering.name + "'");
    }
    const auto probs = born_probabilities(result.final_state, partition);
    auto p = probs.find(it->second);
    if (p == probs.end() || p->second == 0.0) {
      throw Error(ErrorCode::ImpossibleOutcome, "outcome '" + it->second + "' of '" +
                                                    partition.subsystem + "' cannot occur in '" +
                                                    ordering.name + "'");
    }
    result.probability *= p->second;
    result.final_state =
        conditional_state(result.final_state, partition.subsystem, partition, it->second);
    result.snapshots.push_back({"measure(" + partition.subsystem + "=" + it->second + ")",
                                result.final_state, result.probability});
  }
  return result;
}

RetrodictionReport retrodiction_report(const Ket& initial,
                                       const std::vector<MeasurementOrdering>& orderings,
                                       const ConditionedOutcomes& outcomes) {
  RetrodictionReport report;
  std::map<std::string, std::set<std::string>> forced_modes;

  for (const auto& ordering : orderings) {
    auto& forced = report.forced_support[ordering.name];
    const auto run = evolve_ordered(initial, ordering, outcomes);
    for (std::size_t i = 0; i < ordering.steps.size(); ++i) {
      if (!std::holds_alternative<MeasureStep>(ordering.steps[i])) continue;
      const Ket& state = run.snapshots[i].state;
      if (state.is_zero()) continue;
      for (const auto& subsystem : state.subsystems()) {
        const auto initial_modes = initial.modes(subsystem);
        for (const auto& [mode, prob] : mode_marginals(state, subsystem)) {
          if (prob >= 1.0 - kForcedTolerance && initial_modes.contains(mode)) {
            forced.insert(BasisLabel{{subsystem, mode}});
            forced_modes[subsystem].insert(mode);
          }
        }
      }
    }
  }

  std::vector<std::pair<std::string, std::vector<std::string>>> groups;
  for (const auto& [subsystem, modes] : forced_modes) {
    groups.emplace_back(subsystem, std::vector<std::string>(modes.begin(), modes.end()));
  }
  std::vector<Factor> scratch;
  combine(groups, 0, scratch, report.joint_required);

  const auto initial_support = support(initial, 0.0);
  for (const auto& joint : report.joint_required) {
    std::set<std::string> subsystems;
    for (const auto& f : joint.factors()) subsystems.insert(f.subsystem);
    bool present = false;
    for (const auto& label : initial_support) {
      if (label.restricted_to(subsystems) == joint) {
        present = true;
        break;
      }
    }
    if (!present) report.missing_from_initial.insert(joint);
  }
  report.contradiction = !report.missing_from_initial.empty();
  return report;
}

namespace setups {

ObservablePartition hardy_detectors(const std::string& particle) {
  return ObservablePartition::per_mode(particle, {"c", "d"});
}

MeasurementOrdering hardy_ordering(HardyOrdering which) {
  const ApplyStep bs_plus{hardy_splitter(kPlus)};
  const ApplyStep bs_minus{hardy_splitter(kMinus)};
  const MeasureStep m_plus{hardy_detectors(kPlus)};
  const MeasureStep m_minus{hardy_detectors(kMinus)};
  switch (which) {
    case HardyOrdering::Lab:
      return {"lab", {bs_plus, bs_minus, m_plus, m_minus}};
    case HardyOrdering::FramePlus:
      return {"frame-plus", {bs_plus, m_plus, bs_minus, m_minus}};
    case HardyOrdering::FrameMinus:
      return {"frame-minus", {bs_minus, m_minus, bs_plus, m_plus}};
  }
  throw Error(ErrorCode::InvalidArgument, "unknown Hardy ordering");
}

}  // namespace setups

}  // namespace qcollapse
