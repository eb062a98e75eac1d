#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qcollapse/screen.hpp"
#include "support.hpp"

using namespace qcollapse;
using testing_support::error_code;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<PlaneWaveComponent> trio() {
  const double a = 1.0 / std::sqrt(3.0);
  return {{a, -kTwoPi, 0.0}, {a, 0.0, 0.0}, {a, kTwoPi, 0.0}};
}

}  // namespace

TEST_SUITE("screen") {
  TEST_CASE("three equal beams follow (1/3)|1 + 2 cos 2 pi x|^2") {
    const auto m = intensity_pattern(trio(), ScreenGrid{0.0, 1.0, 1000});
    for (std::size_t i = 0; i < m.values.size(); ++i) {
      const double x = m.positions[i];
      const double c = 1.0 + 2.0 * std::cos(kTwoPi * x);
      CHECK(std::abs(m.values[i] - c * c / 3.0) < 1e-12);
    }
    CHECK(std::abs(m.mean() - 1.0) < 1e-12);
  }

  TEST_CASE("visibility on a grid containing the zeros") {
    // 999 points include x = 1/3 and 2/3 where the trio vanishes.
    const auto m = intensity_pattern(trio(), ScreenGrid{0.0, 1.0, 999});
    CHECK(std::abs(visibility(m) - 1.0) < 1e-12);
    CHECK(std::abs(m.max() - 3.0) < 1e-12);
  }

  TEST_CASE("two crossing beams: visibility equals the amplitude contrast") {
    for (double w : {0.5, 0.2, 0.9}) {
      const std::vector<PlaneWaveComponent> two{{std::sqrt(w), kTwoPi, 0.0},
                                                {std::sqrt(1 - w), -kTwoPi, 0.0}};
      const auto m = intensity_pattern(two, ScreenGrid{});
      CHECK(std::abs(visibility(m) - 2.0 * std::sqrt(w * (1 - w))) < 1e-12);
    }
  }

  TEST_CASE("mixtures of single beams are flat") {
    const auto m = mixture_intensity({{0.5, {{1.0, kTwoPi, 0.0}}}, {0.5, {{1.0, -kTwoPi, 0.0}}}},
                                     ScreenGrid{});
    CHECK(visibility(m) < 1e-12);
    CHECK(error_code([] { mixture_intensity({{0.7, {{1.0, 0.0, 0.0}}}}, ScreenGrid{}); }) ==
          ErrorCode::BadWeights);
    CHECK(error_code([] {
            mixture_intensity({{1.5, {{1.0, 0.0, 0.0}}}, {-0.5, {{1.0, 0.0, 0.0}}}}, ScreenGrid{});
          }) == ErrorCode::BadWeights);
  }

  TEST_CASE("property: an incoherent background shifts the mean by its weight") {
    RngStream rng(51, "bg");
    for (int n = 0; n < 50; ++n) {
      const double w = rng.uniform();
      const auto fringe = intensity_pattern(trio(), ScreenGrid{});
      const auto mixed = mixture_intensity({{1.0 - w, trio()}, {w, {{1.0, 0.0, 0.0}}}}, ScreenGrid{});
      for (std::size_t i = 0; i < fringe.values.size(); i += 37) {
        CHECK(std::abs(mixed.values[i] - ((1.0 - w) * fringe.values[i] + w)) < 1e-12);
      }
    }
  }

  TEST_CASE("zero maps") {
    IntensityMap zero{{0.0, 0.5}, {0.0, 0.0}};
    CHECK(error_code([&] { visibility(zero); }) == ErrorCode::ZeroIntensity);
    RngStream rng(1);
    CHECK(error_code([&] { sample_hits(zero, 10, rng); }) == ErrorCode::ZeroIntensity);
  }

  TEST_CASE("sampled hits converge to the normalized map") {
    const auto m = intensity_pattern(trio(), ScreenGrid{0.0, 1.0, 16});
    RngStream rng(52, "hits");
    const std::size_t n = 100000;
    const auto bins = sample_hits(m, n, rng);
    const double total = m.mean() * 16.0;
    std::size_t sum = 0;
    for (std::size_t i = 0; i < bins.size(); ++i) {
      const double p = m.values[i] / total;
      CHECK(std::abs(bins[i] / double(n) - p) <= 5.0 * testing_support::binomial_sigma(p, n) + 1e-12);
      sum += bins[i];
    }
    CHECK(sum == n);
  }

  TEST_CASE("components need a wavenumber for every mode") {
    const Ket k = normalize(basis_ket("p", "a").plus(basis_ket("p", "b")));
    CHECK(components_from_ket(k, "p", {{"a", 1.0}, {"b", -1.0}}).size() == 2);
    CHECK(error_code([&] { components_from_ket(k, "p", {{"a", 1.0}}); }) == ErrorCode::InvalidArgument);
  }
}
