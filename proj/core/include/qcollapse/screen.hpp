#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <numbers>
#include <utility>
#include <vector>

#include "qcollapse/rng.hpp"
#include "qcollapse/statevec.hpp"

namespace qcollapse {

/// Scalar plane wave crossing the plate: amp * exp(i (kappa x + phase)).
struct PlaneWaveComponent {
  Complex amplitude{1.0, 0.0};
  double kappa = 0.0;
  double phase = 0.0;
};

/// `points` positions x0, x0 + L/n, ..., x0 + (n-1) L/n. The end point is
/// excluded so a grid over whole beat periods averages periodic terms to zero.
struct ScreenGrid {
  double origin = 0.0;
  double length = 1.0;
  std::size_t points = 1024;

  double position(std::size_t i) const {
    return origin + length * static_cast<double>(i) / static_cast<double>(points);
  }
};

inline constexpr double kDefaultKappa = 2.0 * std::numbers::pi;

struct IntensityMap {
  std::vector<double> positions;
  std::vector<double> values;

  double mean() const;
  double min() const;
  double max() const;
};

IntensityMap intensity_pattern(const std::vector<PlaneWaveComponent>& components,
                               const ScreenGrid& grid);

using WeightedBranch = std::pair<double, std::vector<PlaneWaveComponent>>;

/// Incoherent sum of per-branch patterns; weights must sum to 1.
IntensityMap mixture_intensity(const std::vector<WeightedBranch>& branches,
                               const ScreenGrid& grid);

/// (max - min) / (max + min).
double visibility(const IntensityMap& m);

/// One component per occupied mode of `subsystem`, carrying the ket's
/// amplitude and the wavenumber assigned to that mode.
std::vector<PlaneWaveComponent> components_from_ket(const Ket& k, const std::string& subsystem,
                                                    const std::map<std::string, double>& kappas);

/// Monte Carlo accumulation: `hits` plate positions drawn from the normalized
/// map, binned back onto the grid.
std::vector<std::size_t> sample_hits(const IntensityMap& m, std::size_t hits, RngStream& rng);

}  // namespace qcollapse
