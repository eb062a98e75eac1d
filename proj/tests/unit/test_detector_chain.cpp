#include <doctest.h>

#include <cmath>

#include "qcollapse/detector_chain.hpp"
#include "qcollapse/optics.hpp"
#include "support.hpp"

using namespace qcollapse;
using testing_support::error_code;

namespace {

Ket split_photon() { return evolve(setups::which_way_input(), setups::which_way(0.0)).back(); }

}  // namespace

TEST_SUITE("detector_chain") {
  TEST_CASE("seeding assigns roles in label order") {
    const ChainState cs = seed(split_photon(), 3);
    REQUIRE(cs.branches().size() == 2);
    CHECK(cs.branches()[0].label == "a");
    CHECK(cs.branches()[0].role == PacketRole::First);
    CHECK(cs.branches()[0].perturbed_a == 3);
    CHECK(cs.branches()[1].perturbed_a == 0);
    CHECK(cs.branches()[1].perturbed_b == 0);
  }

  TEST_CASE("amplification arithmetic") {
    // 3 -> 6 -> 12 -> 24 -> 48 for a; b arrives at step 2 with 3, then 6, 12.
    const ChainState cs = amplify(seed(split_photon(), 3), {4, 2.0, 2, 3});
    const auto* a = cs.find("a");
    const auto* b = cs.find("b");
    CHECK(a->perturbed_a == 48);
    CHECK(a->perturbed_b == 0);
    CHECK(b->perturbed_a == 0);
    CHECK(b->perturbed_b == 12);
    CHECK(a->history == std::vector<std::uint64_t>{3, 6, 12, 24, 48});
    CHECK(b->history == std::vector<std::uint64_t>{0, 0, 3, 6, 12});
    CHECK(cs.steps_elapsed() == 4);
  }

  TEST_CASE("non-integer growth rounds up") {
    const ChainState cs = amplify(seed(split_photon(), 3), {2, 1.5, std::nullopt, 1});
    CHECK(cs.find("a")->perturbed_a == 8);  // 3 -> ceil(4.5) = 5 -> ceil(7.5) = 8
  }

  TEST_CASE("property: branches never share perturbed particles") {
    RngStream rng(61, "chain");
    for (int n = 0; n < 200; ++n) {
      const auto n0 = 1 + static_cast<std::uint64_t>(rng.uniform() * 10);
      const auto k0 = 1 + static_cast<std::uint64_t>(rng.uniform() * 10);
      const auto arrival = 1 + static_cast<std::uint64_t>(rng.uniform() * 5);
      const double g = 1.1 + 2.0 * rng.uniform();
      const ChainState cs = amplify(seed(split_photon(), n0), {20, g, arrival, k0});
      for (const auto& b : cs.branches()) CHECK(b.perturbed_a * b.perturbed_b == 0);
      CHECK(cross_branch_amplitude(cs) == Complex{});
    }
  }

  TEST_CASE("state validation") {
    ChainBranch bad{"a", PacketRole::First, 1.0, 3, 2, {}};
    CHECK(error_code([&] { ChainState({bad}, 100, 100); }) == ErrorCode::InvalidChainState);
    ChainBranch x{"a", PacketRole::First, std::sqrt(0.5), 1, 0, {}};
    ChainBranch y{"b", PacketRole::First, std::sqrt(0.5), 1, 0, {}};
    CHECK(error_code([&] { ChainState({x, y}, 100, 100); }) == ErrorCode::InvalidChainState);
    ChainBranch light{"a", PacketRole::First, 0.5, 1, 0, {}};
    CHECK(error_code([&] { ChainState({light}, 100, 100); }) == ErrorCode::InvalidChainState);
    ChainBranch big{"a", PacketRole::First, 1.0, 200, 0, {}};
    CHECK(error_code([&] { ChainState({big}, 100, 100); }) == ErrorCode::InvalidChainState);
  }

  TEST_CASE("seeding and amplification errors") {
    const Ket three = evolve(setups::triple_split_input(), setups::triple_split(0, 0)).back();
    CHECK(error_code([&] { seed(three, 1); }) == ErrorCode::UnsupportedTopology);
    CHECK(error_code([] { seed(basis_ket("p", "a").scaled(2.0), 1); }) == ErrorCode::InvalidArgument);
    const ChainState cs = seed(split_photon(), 3, 50, 50);
    CHECK(error_code([&] { amplify(cs, {10, 2.0, 1, 1}); }) == ErrorCode::PoolExhausted);
    CHECK(error_code([&] { amplify(cs, {1, 1.0, 1, 1}); }) == ErrorCode::InvalidArgument);
  }

  TEST_CASE("threshold collapse") {
    const ChainState small = amplify(seed(split_photon(), 3), {3, 2.0, 1, 3});
    RngStream rng(62, "collapse");
    CHECK(error_code([&] { threshold_collapse(small, 1'000'000, rng); }) == ErrorCode::NotMacroscopic);

    const ChainState big = amplify(seed(split_photon(), 3), {25, 2.0, 2, 3});
    int a = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
      const auto r = threshold_collapse(big, 1'000'000, rng);
      REQUIRE(r.losing_branch.has_value());
      REQUIRE(r.losing_count == 0);
      REQUIRE(r.post_state.branches().size() == 1);
      REQUIRE(std::abs(std::abs(r.post_state.branches()[0].amplitude) - 1.0) < 1e-15);
      if (r.selected_branch == "a") ++a;
    }
    CHECK(std::abs(a / double(n) - 0.5) < 0.02);
  }
}
