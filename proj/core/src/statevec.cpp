#include "qcollapse/statevec.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qcollapse/error.hpp"

namespace qcollapse {

BasisLabel::BasisLabel(std::initializer_list<Factor> factors)
    : BasisLabel(std::vector<Factor>(factors)) {}

BasisLabel::BasisLabel(std::vector<Factor> factors) : factors_(std::move(factors)) {
  std::sort(factors_.begin(), factors_.end());
  for (std::size_t i = 1; i < factors_.size(); ++i) {
    if (factors_[i].subsystem == factors_[i - 1].subsystem) {
      throw Error(ErrorCode::SubsystemClash,
                  "subsystem '" + factors_[i].subsystem + "' appears twice in one label");
    }
  }
}

const std::string* BasisLabel::mode_of(const std::string& subsystem) const {
  auto it = std::lower_bound(factors_.begin(), factors_.end(), subsystem,
                             [](const Factor& f, const std::string& s) { return f.subsystem < s; });
  if (it == factors_.end() || it->subsystem != subsystem) return nullptr;
  return &it->mode;
}

BasisLabel BasisLabel::with_mode(const std::string& subsystem, const std::string& mode) const {
  std::vector<Factor> out = factors_;
  bool replaced = false;
  for (auto& f : out) {
    if (f.subsystem == subsystem) {
      f.mode = mode;
      replaced = true;
    }
  }
  if (!replaced) out.push_back({subsystem, mode});
  return BasisLabel(std::move(out));
}

BasisLabel BasisLabel::without(const std::string& subsystem) const {
  std::vector<Factor> out;
  out.reserve(factors_.size());
  for (const auto& f : factors_) {
    if (f.subsystem != subsystem) out.push_back(f);
  }
  return BasisLabel(std::move(out));
}

BasisLabel BasisLabel::restricted_to(const std::set<std::string>& subsystems) const {
  std::vector<Factor> out;
  for (const auto& f : factors_) {
    if (subsystems.contains(f.subsystem)) out.push_back(f);
  }
  return BasisLabel(std::move(out));
}

BasisLabel BasisLabel::merge(const BasisLabel& a, const BasisLabel& b) {
  std::vector<Factor> out = a.factors_;
  out.insert(out.end(), b.factors_.begin(), b.factors_.end());
  return BasisLabel(std::move(out));
}

std::string BasisLabel::str() const {
  if (factors_.empty()) return "|vac>";
  std::string s = "|";
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    if (i) s += ",";
    s += factors_[i].subsystem + ":" + factors_[i].mode;
  }
  return s + ">";
}

Complex Ket::amplitude(const BasisLabel& label) const {
  auto it = terms_.find(label);
  return it == terms_.end() ? Complex{} : it->second;
}

double Ket::norm_squared() const {
  double s = 0.0;
  for (const auto& [label, amp] : terms_) s += std::norm(amp);
  return s;
}

double Ket::norm() const { return std::sqrt(norm_squared()); }

std::set<std::string> Ket::subsystems() const {
  std::set<std::string> out;
  for (const auto& [label, amp] : terms_) {
    for (const auto& f : label.factors()) out.insert(f.subsystem);
  }
  return out;
}

std::set<std::string> Ket::modes(const std::string& subsystem) const {
  std::set<std::string> out;
  for (const auto& [label, amp] : terms_) {
    if (const auto* m = label.mode_of(subsystem)) out.insert(*m);
  }
  return out;
}

Ket Ket::scaled(Complex factor) const {
  Ket out;
  for (const auto& [label, amp] : terms_) out.accumulate(label, amp * factor);
  return out;
}

Ket Ket::plus(const Ket& other) const {
  Ket out = *this;
  for (const auto& [label, amp] : other.terms_) out.accumulate(label, amp);
  return out;
}

void Ket::accumulate(const BasisLabel& label, Complex amp) {
  auto [it, inserted] = terms_.try_emplace(label, amp);
  if (!inserted) it->second += amp;
  if (std::abs(it->second) < kDropTolerance) terms_.erase(it);
}

std::string Ket::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os.precision(6);
  bool first = true;
  for (const auto& [label, amp] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << "(" << amp.real() << (amp.imag() < 0 ? "-" : "+") << std::abs(amp.imag()) << "i)"
       << label.str();
  }
  return os.str();
}

Ket make_ket(const std::vector<std::pair<BasisLabel, Complex>>& terms) {
  std::map<BasisLabel, Complex> sums;
  for (const auto& [label, amp] : terms) sums[label] += amp;
  Ket out;
  for (const auto& [label, amp] : sums) out.accumulate(label, amp);
  if (out.is_zero()) throw Error(ErrorCode::EmptyState, "no term with nonzero amplitude");
  return out;
}

Ket tensor(const Ket& k1, const Ket& k2) {
  const auto s1 = k1.subsystems();
  for (const auto& s : k2.subsystems()) {
    if (s1.contains(s)) throw Error(ErrorCode::SubsystemClash, "both kets address '" + s + "'");
  }
  Ket out;
  for (const auto& [l1, a1] : k1.terms()) {
    for (const auto& [l2, a2] : k2.terms()) out.accumulate(BasisLabel::merge(l1, l2), a1 * a2);
  }
  return out;
}

Complex inner(const Ket& k1, const Ket& k2) {
  const Ket& small = k1.size() <= k2.size() ? k1 : k2;
  const Ket& large = k1.size() <= k2.size() ? k2 : k1;
  Complex s{};
  for (const auto& [label, amp] : small.terms()) {
    const Complex other = large.amplitude(label);
    s += (&small == &k1) ? std::conj(amp) * other : std::conj(other) * amp;
  }
  return s;
}

Ket normalize(const Ket& k) {
  const double n = k.norm();
  if (n == 0.0) throw Error(ErrorCode::ZeroNorm, "cannot normalize the zero ket");
  if (std::abs(n - 1.0) < 1e-15) return k;
  return k.scaled(1.0 / n);
}

bool equal_up_to_global_phase(const Ket& k1, const Ket& k2, double tol) {
  return std::abs(inner(k1, k2)) >= 1.0 - tol;
}

std::set<BasisLabel> support(const Ket& k, double tol) {
  std::set<BasisLabel> out;
  for (const auto& [label, amp] : k.terms()) {
    if (std::abs(amp) > tol) out.insert(label);
  }
  return out;
}

Ket basis_ket(const std::string& subsystem, const std::string& mode) {
  return make_ket({{BasisLabel{{subsystem, mode}}, 1.0}});
}

Ket vacuum_ket() { return make_ket({{BasisLabel{}, 1.0}}); }

}  // namespace qcollapse
