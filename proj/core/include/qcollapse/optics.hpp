#pragma once

#include <array>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qcollapse/statevec.hpp"

namespace qcollapse {

/// Lossless two-port beam splitter acting on one subsystem.
///
/// Transmission amplitude is sqrt(1-R), reflection amplitude is i*sqrt(R).
/// With `first_transmits_to_first` (the default) input m1 transmits to o1 and
/// reflects to o2, while m2 reflects to o1 and transmits to o2. Otherwise the
/// roles of o1 and o2 are exchanged for both inputs.
struct BeamSplitter {
  std::string subsystem;
  std::pair<std::string, std::string> in_modes;
  std::pair<std::string, std::string> out_modes;
  double reflectivity = 0.5;
  bool first_transmits_to_first = true;

  /// Row = output (o1, o2), column = input (m1, m2).
  std::array<std::array<Complex, 2>, 2> matrix() const;
};

/// Multiplies the amplitude of `mode` by exp(i*phase).
struct PhaseShifter {
  std::string subsystem;
  std::string mode;
  double phase = 0.0;
};

/// Relabels `from` to `to` and multiplies by i.
struct Mirror {
  std::string subsystem;
  std::string from;
  std::string to;
};

using OpticalElement = std::variant<BeamSplitter, PhaseShifter, Mirror>;

/// Staged sequence of elements; elements of one stage address disjoint modes.
class OpticalCircuit {
 public:
  using Stage = std::vector<OpticalElement>;

  OpticalCircuit() = default;
  explicit OpticalCircuit(std::vector<Stage> stages);

  const std::vector<Stage>& stages() const noexcept { return stages_; }
  std::size_t stage_count() const noexcept { return stages_.size(); }

 private:
  std::vector<Stage> stages_;
};

Ket apply_element(const Ket& k, const OpticalElement& e);
Ket apply_stage(const Ket& k, const OpticalCircuit::Stage& stage);
/// State after each stage, final state last. Empty when the circuit has no stages.
std::vector<Ket> evolve(const Ket& k, const OpticalCircuit& c);

// ---------------------------------------------------------------------------
// Named setups used by the scenarios and tests.

namespace setups {

inline const std::string kPlus = "p+";
inline const std::string kMinus = "p-";
inline const std::string kPhoton = "photon";

/// Path-entangled pair (i|u+>|v-> + |v+>|v-> + i|v+>|u->)/sqrt(3).
Ket hardy_initial();
/// 50/50 splitter on one Hardy particle: u -> (c + i d)/sqrt2, v -> (i c + d)/sqrt2.
BeamSplitter hardy_splitter(const std::string& particle);

enum class HardyFrame { PlusOnly, MinusOnly, Both };
Ket hardy_frame_partial(const Ket& k0, HardyFrame which);

/// Mach-Zehnder with phase shifters on the inner arms. Input |a>, stages:
/// BS1, free flight, phase shifters, BS2 into output ports e and f.
OpticalCircuit mach_zehnder(double phi_c, double phi_d);
Ket mach_zehnder_input();

/// Which-way photon before the detector: BS, mirror M on arm a, three retarding
/// mirrors on arm b, path phase on a.
OpticalCircuit which_way(double phi);
Ket which_way_input();

/// Three-way split with BS (R = 1/3), BS' (R = 1/2), mirrors, pi/2 compensator
/// on c, and phase shifters theta1 (a) and theta3 (c).
OpticalCircuit triple_split(double theta1, double theta3);
Ket triple_split_input();

}  // namespace setups

}  // namespace qcollapse
