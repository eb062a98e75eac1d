#include "qcollapse/optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "qcollapse/error.hpp"

namespace qcollapse {

namespace {

constexpr Complex kI{0.0, 1.0};

using ModeKey = std::pair<std::string, std::string>;

std::vector<ModeKey> addressed_modes(const OpticalElement& e) {
  return std::visit(
      [](const auto& el) -> std::vector<ModeKey> {
        using T = std::decay_t<decltype(el)>;
        if constexpr (std::is_same_v<T, BeamSplitter>) {
          std::vector<ModeKey> out{{el.subsystem, el.in_modes.first},
                                   {el.subsystem, el.in_modes.second},
                                   {el.subsystem, el.out_modes.first},
                                   {el.subsystem, el.out_modes.second}};
          std::sort(out.begin(), out.end());
          out.erase(std::unique(out.begin(), out.end()), out.end());
          return out;
        } else if constexpr (std::is_same_v<T, PhaseShifter>) {
          return {{el.subsystem, el.mode}};
        } else {
          if (el.from == el.to) return {{el.subsystem, el.from}};
          return {{el.subsystem, el.from}, {el.subsystem, el.to}};
        }
      },
      e);
}

Ket apply_splitter(const Ket& k, const BeamSplitter& bs) {
  const auto& [m1, m2] = bs.in_modes;
  const auto& [o1, o2] = bs.out_modes;
  if (m1 == m2 || o1 == o2) {
    throw Error(ErrorCode::InvalidCircuit, "beam splitter needs two distinct inputs and outputs");
  }
  if (bs.reflectivity < 0.0 || bs.reflectivity > 1.0) {
    throw Error(ErrorCode::InvalidCircuit, "reflectivity outside [0, 1]");
  }
  const auto present = k.modes(bs.subsystem);
  if (!present.contains(m1) && !present.contains(m2)) {
    throw Error(ErrorCode::ModeMissing, "beam splitter on '" + bs.subsystem +
                                            "' finds neither input mode '" + m1 + "' nor '" + m2 +
                                            "'");
  }
  for (const auto& o : {o1, o2}) {
    if (o != m1 && o != m2 && present.contains(o)) {
      throw Error(ErrorCode::ModeClash,
                  "output mode '" + o + "' of '" + bs.subsystem + "' is already occupied");
    }
  }

  const auto u = bs.matrix();
  Ket out;
  for (const auto& [label, amp] : k.terms()) {
    const std::string* mode = label.mode_of(bs.subsystem);
    int col = -1;
    if (mode && *mode == m1) col = 0;
    if (mode && *mode == m2) col = 1;
    if (col < 0) {
      out.accumulate(label, amp);
      continue;
    }
    out.accumulate(label.with_mode(bs.subsystem, o1), u[0][col] * amp);
    out.accumulate(label.with_mode(bs.subsystem, o2), u[1][col] * amp);
  }
  return out;
}

Ket apply_phase(const Ket& k, const PhaseShifter& ps) {
  const Complex factor = std::polar(1.0, ps.phase);
  Ket out;
  for (const auto& [label, amp] : k.terms()) {
    const std::string* mode = label.mode_of(ps.subsystem);
    out.accumulate(label, (mode && *mode == ps.mode) ? amp * factor : amp);
  }
  return out;
}

Ket apply_mirror(const Ket& k, const Mirror& m) {
  if (m.from != m.to && k.modes(m.subsystem).contains(m.to) &&
      k.modes(m.subsystem).contains(m.from)) {
    throw Error(ErrorCode::ModeClash,
                "mirror target '" + m.to + "' of '" + m.subsystem + "' is already occupied");
  }
  Ket out;
  for (const auto& [label, amp] : k.terms()) {
    const std::string* mode = label.mode_of(m.subsystem);
    if (mode && *mode == m.from) {
      out.accumulate(label.with_mode(m.subsystem, m.to), kI * amp);
    } else {
      out.accumulate(label, amp);
    }
  }
  return out;
}

}  // namespace

std::array<std::array<Complex, 2>, 2> BeamSplitter::matrix() const {
  const Complex t{std::sqrt(1.0 - reflectivity), 0.0};
  const Complex r = kI * std::sqrt(reflectivity);
  if (first_transmits_to_first) return {{{t, r}, {r, t}}};
  return {{{r, t}, {t, r}}};
}

OpticalCircuit::OpticalCircuit(std::vector<Stage> stages) : stages_(std::move(stages)) {
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    std::set<ModeKey> seen;
    for (const auto& e : stages_[s]) {
      for (const auto& key : addressed_modes(e)) {
        if (!seen.insert(key).second) {
          throw Error(ErrorCode::InvalidCircuit, "stage " + std::to_string(s) +
                                                     " addresses mode '" + key.second + "' of '" +
                                                     key.first + "' twice");
        }
      }
    }
  }
}

Ket apply_element(const Ket& k, const OpticalElement& e) {
  return std::visit(
      [&k](const auto& el) -> Ket {
        using T = std::decay_t<decltype(el)>;
        if constexpr (std::is_same_v<T, BeamSplitter>) {
          return apply_splitter(k, el);
        } else if constexpr (std::is_same_v<T, PhaseShifter>) {
          return apply_phase(k, el);
        } else {
          return apply_mirror(k, el);
        }
      },
      e);
}

Ket apply_stage(const Ket& k, const OpticalCircuit::Stage& stage) {
  Ket out = k;
  for (const auto& e : stage) out = apply_element(out, e);
  return out;
}

std::vector<Ket> evolve(const Ket& k, const OpticalCircuit& c) {
  std::vector<Ket> states;
  states.reserve(c.stage_count());
  Ket current = k;
  for (const auto& stage : c.stages()) {
    current = apply_stage(current, stage);
    states.push_back(current);
  }
  return states;
}

namespace setups {

Ket hardy_initial() {
  const double s = 1.0 / std::sqrt(3.0);
  return make_ket({
      {BasisLabel{{kPlus, "u"}, {kMinus, "v"}}, kI * s},
      {BasisLabel{{kPlus, "v"}, {kMinus, "v"}}, s},
      {BasisLabel{{kPlus, "v"}, {kMinus, "u"}}, kI * s},
  });
}

BeamSplitter hardy_splitter(const std::string& particle) {
  return BeamSplitter{particle, {"u", "v"}, {"c", "d"}, 0.5, true};
}

Ket hardy_frame_partial(const Ket& k0, HardyFrame which) {
  for (const auto& p : {kPlus, kMinus}) {
    const auto modes = k0.modes(p);
    if (!modes.contains("u") && !modes.contains("v")) {
      throw Error(ErrorCode::ModeMissing, "Hardy input lacks path modes u/v for '" + p + "'");
    }
  }
  Ket k = k0;
  if (which != HardyFrame::MinusOnly) k = apply_element(k, hardy_splitter(kPlus));
  if (which != HardyFrame::PlusOnly) k = apply_element(k, hardy_splitter(kMinus));
  return k;
}

OpticalCircuit mach_zehnder(double phi_c, double phi_d) {
  return OpticalCircuit({
      {BeamSplitter{kPhoton, {"a", "b"}, {"d", "c"}, 0.5, true}},
      {},
      {PhaseShifter{kPhoton, "c", phi_c}, PhaseShifter{kPhoton, "d", phi_d}},
      {BeamSplitter{kPhoton, {"c", "d"}, {"f", "e"}, 0.5, true}},
  });
}

Ket mach_zehnder_input() { return basis_ket(kPhoton, "a"); }

OpticalCircuit which_way(double phi) {
  return OpticalCircuit({
      {BeamSplitter{kPhoton, {"s", "s'"}, {"b0", "a0"}, 0.5, true}},
      {Mirror{kPhoton, "a0", "a"}, Mirror{kPhoton, "b0", "b1"}},
      {Mirror{kPhoton, "b1", "b2"}},
      {Mirror{kPhoton, "b2", "b"}, PhaseShifter{kPhoton, "a", phi}},
  });
}

Ket which_way_input() { return basis_ket(kPhoton, "s"); }

OpticalCircuit triple_split(double theta1, double theta3) {
  return OpticalCircuit({
      {BeamSplitter{kPhoton, {"s", "s'"}, {"t", "c"}, 1.0 / 3.0, true}},
      {BeamSplitter{kPhoton, {"t", "t'"}, {"b0", "a0"}, 0.5, true},
       PhaseShifter{kPhoton, "c", std::numbers::pi / 2}},
      {Mirror{kPhoton, "a0", "a"}, Mirror{kPhoton, "b0", "b1"}},
      {Mirror{kPhoton, "b1", "b"}, PhaseShifter{kPhoton, "a", theta1},
       PhaseShifter{kPhoton, "c", theta3}},
  });
}

Ket triple_split_input() { return basis_ket(kPhoton, "s"); }

}  // namespace setups

}  // namespace qcollapse
