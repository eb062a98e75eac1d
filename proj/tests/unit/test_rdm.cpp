#include <doctest.h>

#include <cmath>
#include <random>

#include "qcollapse/rdm.hpp"
#include "support.hpp"

using namespace qcollapse;
using testing_support::binomial_sigma;
using testing_support::error_code;

TEST_SUITE("rdm") {
  TEST_CASE("zero delay never mismatches") {
    RdmConfig cfg;
    RngStream rng(71, "zero");
    CHECK(mismatch_fraction(cfg, 0.0, 20000, rng) == 0.0);
    CHECK(mismatch_fraction(cfg, 0.0004, 20000, rng) == 0.0);  // rounds to zero ticks
  }

  TEST_CASE("mismatch matches the Poisson-parity oracle") {
    // An odd number of jumps in the window leaves the pair in the other
    // configuration. Oracle: parity of a Poisson count with mean r*delta.
    RdmConfig cfg;
    const int n = 100000;
    for (double delta : {0.1, 0.5, 1.5}) {
      RngStream rng(72, "parity");
      const double sim = mismatch_fraction(cfg, delta, n, rng);
      std::mt19937_64 eng(12345);
      std::poisson_distribution<int> pois(cfg.rate * delta);
      int odd = 0;
      for (int i = 0; i < n; ++i) odd += pois(eng) % 2;
      const double oracle = odd / double(n);
      const double band = 4.0 * std::hypot(binomial_sigma(sim, n), binomial_sigma(oracle, n));
      CHECK(std::abs(sim - oracle) < band);
    }
  }

  TEST_CASE("mismatch grows with the delay") {
    RdmConfig cfg;
    RngStream rng(73, "mono");
    double prev = -1.0;
    for (double d = 0.0; d <= 2.0; d += 0.25) {
      const double f = mismatch_fraction(cfg, d, 50000, rng);
      CHECK(f >= prev - 4.0 * binomial_sigma(0.5, 50000) * std::sqrt(2.0));
      prev = f;
    }
  }

  TEST_CASE("repeatable for a fixed stream") {
    RdmConfig cfg;
    RngStream a(74, "rep");
    RngStream b(74, "rep");
    CHECK(mismatch_fraction(cfg, 0.7, 10000, a) == mismatch_fraction(cfg, 0.7, 10000, b));
  }

  TEST_CASE("trajectories keep the pair together and the weights stationary") {
    RdmConfig cfg;
    cfg.weights = {0.3, 0.7};
    cfg.duration = 2000.0;
    cfg.tick = 0.01;
    RngStream rng(75, "traj");
    const auto t = run_entangled(cfg, rng);
    std::size_t in0 = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto j = t.at(i);
      REQUIRE(j.positions == cfg.configurations[static_cast<std::size_t>(j.config_id)]);
      in0 += j.config_id == 0;
    }
    // Long-run occupation; correlation time ~ 1/(2 r) makes the error a few percent at most.
    CHECK(std::abs(in0 / double(t.size()) - 0.3) < 0.03);
    CHECK(t.jumps() > 0);
  }

  TEST_CASE("position sampling") {
    RngStream rng(76, "pos");
    int x1 = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) x1 += sample_position({{"x1", 0.25}, {"x2", 0.75}}, rng) == "x1";
    CHECK(std::abs(x1 / double(n) - 0.25) < 4 * binomial_sigma(0.25, n));
    CHECK(error_code([&] { sample_position({{"x1", 0.5}}, rng); }) == ErrorCode::BadWeights);
    CHECK(error_code([&] { sample_position({{"x1", 1.5}, {"x2", -0.5}}, rng); }) == ErrorCode::BadWeights);
  }

  TEST_CASE("configuration validation") {
    RdmConfig cfg;
    cfg.rate = -1.0;
    CHECK(error_code([&] { cfg.validate(); }) == ErrorCode::InvalidArgument);
    cfg.rate = 1.0;
    cfg.weights = {0.6, 0.6};
    CHECK(error_code([&] { cfg.validate(); }) == ErrorCode::BadWeights);
    RngStream rng(1);
    CHECK(error_code([&] { mismatch_fraction(RdmConfig{}, -1.0, 10, rng); }) == ErrorCode::InvalidArgument);
  }
}
