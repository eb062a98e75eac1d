#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <optional>

#include "qcollapse/error.hpp"
#include "qcollapse/rng.hpp"
#include "qcollapse/statevec.hpp"

namespace testing_support {

using qcollapse::BasisLabel;
using qcollapse::Complex;
using qcollapse::Ket;

inline Complex random_complex(qcollapse::RngStream& rng) { return {rng.normal(), rng.normal()}; }

// Random ket over the product of the given per-subsystem mode lists.
inline Ket random_ket(qcollapse::RngStream& rng,
                      const std::vector<std::pair<std::string, std::vector<std::string>>>& spaces) {
  std::vector<std::vector<qcollapse::Factor>> labels{{}};
  for (const auto& [sub, modes] : spaces) {
    std::vector<std::vector<qcollapse::Factor>> next;
    for (const auto& l : labels) {
      for (const auto& m : modes) {
        auto e = l;
        e.push_back({sub, m});
        next.push_back(std::move(e));
      }
    }
    labels = std::move(next);
  }
  Ket k;
  for (auto& l : labels) k.accumulate(BasisLabel(std::move(l)), random_complex(rng));
  return k;
}

inline double distance(const Ket& a, const Ket& b) { return a.plus(b.scaled(-1.0)).norm(); }

inline double binomial_sigma(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

// Code of the qcollapse::Error thrown by f, or nullopt when nothing is thrown.
template <class F>
std::optional<qcollapse::ErrorCode> error_code(F&& f) {
  try {
    f();
  } catch (const qcollapse::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace testing_support
