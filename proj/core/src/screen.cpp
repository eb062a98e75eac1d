#include "qcollapse/screen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qcollapse/error.hpp"

namespace qcollapse {

double IntensityMap::mean() const {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double IntensityMap::min() const { return *std::min_element(values.begin(), values.end()); }

double IntensityMap::max() const { return *std::max_element(values.begin(), values.end()); }

IntensityMap intensity_pattern(const std::vector<PlaneWaveComponent>& components,
                               const ScreenGrid& grid) {
  if (components.empty()) throw Error(ErrorCode::InvalidArgument, "no plane-wave components");
  if (grid.points == 0) throw Error(ErrorCode::InvalidArgument, "empty screen grid");
  IntensityMap m;
  m.positions.resize(grid.points);
  m.values.resize(grid.points);
  for (std::size_t i = 0; i < grid.points; ++i) {
    const double x = grid.position(i);
    Complex field{};
    for (const auto& c : components) field += c.amplitude * std::polar(1.0, c.kappa * x + c.phase);
    m.positions[i] = x;
    m.values[i] = std::norm(field);
  }
  return m;
}

IntensityMap mixture_intensity(const std::vector<WeightedBranch>& branches,
                               const ScreenGrid& grid) {
  if (branches.empty()) throw Error(ErrorCode::BadWeights, "no branches");
  double total = 0.0;
  for (const auto& [w, comps] : branches) {
    if (w < 0.0) throw Error(ErrorCode::BadWeights, "negative branch weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorCode::BadWeights, "branch weights sum to " + std::to_string(total));
  }
  IntensityMap out;
  for (const auto& [w, comps] : branches) {
    const auto m = intensity_pattern(comps, grid);
    if (out.values.empty()) {
      out.positions = m.positions;
      out.values.assign(m.values.size(), 0.0);
    }
    for (std::size_t i = 0; i < m.values.size(); ++i) out.values[i] += w * m.values[i];
  }
  return out;
}

std::vector<PlaneWaveComponent> components_from_ket(const Ket& k, const std::string& subsystem,
                                                    const std::map<std::string, double>& kappas) {
  std::vector<PlaneWaveComponent> out;
  for (const auto& [label, amp] : k.terms()) {
    const std::string* mode = label.mode_of(subsystem);
    if (!mode) continue;
    auto it = kappas.find(*mode);
    if (it == kappas.end()) {
      throw Error(ErrorCode::InvalidArgument, "no wavenumber for mode '" + *mode + "'");
    }
    out.push_back({amp, it->second, 0.0});
  }
  return out;
}

double visibility(const IntensityMap& m) {
  if (m.values.empty()) throw Error(ErrorCode::InvalidArgument, "empty intensity map");
  const double hi = m.max();
  const double lo = m.min();
  if (hi + lo == 0.0) throw Error(ErrorCode::ZeroIntensity, "map is zero everywhere");
  return (hi - lo) / (hi + lo);
}

std::vector<std::size_t> sample_hits(const IntensityMap& m, std::size_t hits, RngStream& rng) {
  std::vector<double> cdf(m.values.size());
  std::partial_sum(m.values.begin(), m.values.end(), cdf.begin());
  if (cdf.empty() || cdf.back() <= 0.0) throw Error(ErrorCode::ZeroIntensity, "nothing to sample");
  std::vector<std::size_t> bins(m.values.size(), 0);
  for (std::size_t n = 0; n < hits; ++n) {
    const double u = rng.uniform() * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    ++bins[static_cast<std::size_t>(it - cdf.begin())];
  }
  return bins;
}

}  // namespace qcollapse
