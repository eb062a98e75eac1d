#pragma once

#include <complex>
#include <initializer_list>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace qcollapse {

using Complex = std::complex<double>;

inline constexpr double kDropTolerance = 1e-14;

/// One factor of a tensor-product basis state: which subsystem, which mode.
struct Factor {
  std::string subsystem;
  std::string mode;

  friend auto operator<=>(const Factor&, const Factor&) = default;
};

/// Basis state of a composite system, e.g. {(p+, u), (p-, v)}.
///
/// Factors are kept sorted by subsystem name, so equality does not depend on
/// construction order. The empty label is the vacuum (no subsystems).
class BasisLabel {
 public:
  BasisLabel() = default;
  BasisLabel(std::initializer_list<Factor> factors);
  explicit BasisLabel(std::vector<Factor> factors);

  const std::vector<Factor>& factors() const noexcept { return factors_; }
  bool empty() const noexcept { return factors_.empty(); }

  /// Mode of `subsystem`, or nullptr when the label has no such factor.
  const std::string* mode_of(const std::string& subsystem) const;
  bool has(const std::string& subsystem) const { return mode_of(subsystem) != nullptr; }

  BasisLabel with_mode(const std::string& subsystem, const std::string& mode) const;
  BasisLabel without(const std::string& subsystem) const;
  /// Restriction to the given subsystems (absent ones are skipped).
  BasisLabel restricted_to(const std::set<std::string>& subsystems) const;

  /// Union of two labels over disjoint subsystems; throws SubsystemClash.
  static BasisLabel merge(const BasisLabel& a, const BasisLabel& b);

  std::string str() const;

  friend auto operator<=>(const BasisLabel&, const BasisLabel&) = default;

 private:
  std::vector<Factor> factors_;
};

/// Sparse superposition over labeled basis states. Value type; every
/// operation returns a new ket.
class Ket {
 public:
  using Terms = std::map<BasisLabel, Complex>;

  /// The zero ket.
  Ket() = default;

  const Terms& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool is_zero() const noexcept { return terms_.empty(); }

  Complex amplitude(const BasisLabel& label) const;
  double norm_squared() const;
  double norm() const;

  /// Subsystem names appearing in any term.
  std::set<std::string> subsystems() const;
  /// Modes of `subsystem` appearing in any term.
  std::set<std::string> modes(const std::string& subsystem) const;

  Ket scaled(Complex factor) const;
  Ket plus(const Ket& other) const;

  /// Accumulates `amp` onto `label`, dropping the term if it falls below the
  /// drop tolerance.
  void accumulate(const BasisLabel& label, Complex amp);

  std::string str() const;

  friend bool operator==(const Ket&, const Ket&) = default;

 private:
  Terms terms_;
};

Ket make_ket(const std::vector<std::pair<BasisLabel, Complex>>& terms);
Ket tensor(const Ket& k1, const Ket& k2);
/// <k1|k2>, conjugate-linear in k1.
Complex inner(const Ket& k1, const Ket& k2);
Ket normalize(const Ket& k);
bool equal_up_to_global_phase(const Ket& k1, const Ket& k2, double tol);
std::set<BasisLabel> support(const Ket& k, double tol);

/// Single-subsystem basis ket |mode> with amplitude 1.
Ket basis_ket(const std::string& subsystem, const std::string& mode);
/// The vacuum ket: empty label with amplitude 1.
Ket vacuum_ket();

}  // namespace qcollapse
