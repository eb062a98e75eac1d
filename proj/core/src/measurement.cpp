#include "qcollapse/measurement.hpp"

#include <vector>

#include "qcollapse/error.hpp"

namespace qcollapse {

namespace {

void validate(const Ket& k, const ObservablePartition& p) {
  std::map<std::string, std::string> owner;
  for (const auto& [outcome, modes] : p.outcome_classes) {
    for (const auto& m : modes) {
      if (!owner.emplace(m, outcome).second) {
        throw Error(ErrorCode::BadPartition, "mode '" + m + "' belongs to outcomes '" +
                                                 owner[m] + "' and '" + outcome + "'");
      }
    }
  }
  for (const auto& [label, amp] : k.terms()) {
    const std::string* mode = label.mode_of(p.subsystem);
    if (!mode) {
      throw Error(ErrorCode::BadPartition,
                  "term " + label.str() + " has no factor for '" + p.subsystem + "'");
    }
    if (!owner.contains(*mode)) {
      throw Error(ErrorCode::BadPartition,
                  "mode '" + *mode + "' of '" + p.subsystem + "' is not covered by any outcome");
    }
  }
}

const std::string& outcome_of(const BasisLabel& label, const ObservablePartition& p) {
  const std::string& mode = *label.mode_of(p.subsystem);
  for (const auto& [outcome, modes] : p.outcome_classes) {
    if (modes.contains(mode)) return outcome;
  }
  throw Error(ErrorCode::BadPartition, "mode '" + mode + "' not covered");
}

const std::set<std::string>& outcome_class(const ObservablePartition& p,
                                           const std::string& outcome) {
  auto it = p.outcome_classes.find(outcome);
  if (it == p.outcome_classes.end()) {
    throw Error(ErrorCode::BadPartition,
                "unknown outcome '" + outcome + "' for '" + p.subsystem + "'");
  }
  return it->second;
}

}  // namespace

ObservablePartition ObservablePartition::per_mode(const std::string& subsystem,
                                                  const std::set<std::string>& modes) {
  ObservablePartition p{subsystem, {}};
  for (const auto& m : modes) p.outcome_classes[m] = {m};
  return p;
}

std::string_view to_string(CollapsePolicy policy) noexcept {
  return policy == CollapsePolicy::Collapse ? "collapse" : "unitary";
}

std::map<std::string, double> born_probabilities(const Ket& k, const ObservablePartition& p) {
  return born_probabilities(k, std::span<const ObservablePartition>(&p, 1));
}

std::map<std::string, double> born_probabilities(const Ket& k,
                                                 std::span<const ObservablePartition> parts) {
  if (parts.empty()) throw Error(ErrorCode::BadPartition, "no partition given");
  for (const auto& p : parts) validate(k, p);
  const double total = k.norm_squared();
  if (total == 0.0) throw Error(ErrorCode::ZeroNorm, "Born probabilities of the zero ket");

  // Every combination is listed, including impossible ones.
  std::vector<std::string> labels{""};
  for (std::size_t i = 0; i < parts.size(); ++i) {
    std::vector<std::string> next;
    for (const auto& prefix : labels) {
      for (const auto& [outcome, modes] : parts[i].outcome_classes) {
        next.push_back(i == 0 ? outcome : prefix + "," + outcome);
      }
    }
    labels = std::move(next);
  }
  std::map<std::string, double> probs;
  for (const auto& l : labels) probs[l] = 0.0;

  for (const auto& [label, amp] : k.terms()) {
    std::string key;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (i) key += ",";
      key += outcome_of(label, parts[i]);
    }
    probs[key] += std::norm(amp) / total;
  }
  return probs;
}

Ket project(const Ket& k, const ObservablePartition& p, const std::string& outcome) {
  validate(k, p);
  const auto& cls = outcome_class(p, outcome);
  Ket out;
  for (const auto& [label, amp] : k.terms()) {
    if (cls.contains(*label.mode_of(p.subsystem))) out.accumulate(label, amp);
  }
  return out;
}

Ket collapse(const Ket& k, const ObservablePartition& p, const std::string& outcome) {
  Ket projected = project(k, p, outcome);
  if (projected.is_zero()) {
    throw Error(ErrorCode::ImpossibleOutcome,
                "outcome '" + outcome + "' of '" + p.subsystem + "' has zero probability");
  }
  return normalize(projected);
}

MeasurementOutcome sample(const Ket& k, const ObservablePartition& p, CollapsePolicy policy,
                          RngStream& rng) {
  const auto probs = born_probabilities(k, p);
  const double u = rng.uniform();
  double cumulative = 0.0;
  const std::string* chosen = nullptr;
  double chosen_p = 0.0;
  for (const auto& [outcome, prob] : probs) {
    if (prob <= 0.0) continue;
    cumulative += prob;
    chosen = &outcome;
    chosen_p = prob;
    if (u < cumulative) break;
  }
  MeasurementOutcome result{*chosen, chosen_p, {}};
  result.post_state = policy == CollapsePolicy::Collapse ? collapse(k, p, *chosen) : k;
  return result;
}

Ket conditional_state(const Ket& k, const std::string& subsystem, const ObservablePartition& p,
                      const std::string& outcome) {
  if (subsystem != p.subsystem) {
    throw Error(ErrorCode::BadPartition,
                "partition measures '" + p.subsystem + "', not '" + subsystem + "'");
  }
  const Ket post = collapse(k, p, outcome);
  const auto remaining_modes = post.modes(subsystem);
  if (remaining_modes.size() != 1) return post;

  Ket reduced;
  for (const auto& [label, amp] : post.terms()) reduced.accumulate(label.without(subsystem), amp);
  return normalize(reduced);
}

std::map<std::string, double> mode_marginals(const Ket& k, const std::string& subsystem) {
  const double total = k.norm_squared();
  if (total == 0.0) throw Error(ErrorCode::ZeroNorm, "marginals of the zero ket");
  std::map<std::string, double> out;
  for (const auto& [label, amp] : k.terms()) {
    const std::string* mode = label.mode_of(subsystem);
    out[mode ? *mode : std::string{}] += std::norm(amp) / total;
  }
  return out;
}

}  // namespace qcollapse
