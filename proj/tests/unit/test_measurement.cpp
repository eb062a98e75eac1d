#include <doctest.h>

#include <array>
#include <cmath>

#include "qcollapse/measurement.hpp"
#include "qcollapse/optics.hpp"
#include "support.hpp"

using namespace qcollapse;
using testing_support::binomial_sigma;
using testing_support::error_code;

namespace {

ObservablePartition cd(const std::string& sub) { return ObservablePartition::per_mode(sub, {"c", "d"}); }

Ket eq7_state() {
  return make_ket({{BasisLabel{{"photon", "a"}}, std::sqrt(1.0 / 3.0)},
                   {BasisLabel{{"photon", "b"}}, Complex{0.0, std::sqrt(2.0 / 3.0)}}});
}

}  // namespace

TEST_SUITE("measurement") {
  TEST_CASE("joint Hardy table") {
    const Ket k = setups::hardy_frame_partial(setups::hardy_initial(), setups::HardyFrame::Both);
    const std::array parts{cd("p+"), cd("p-")};
    const auto p = born_probabilities(k, parts);
    REQUIRE(p.size() == 4);
    CHECK(std::abs(p.at("c,c") - 0.75) < 1e-12);
    CHECK(std::abs(p.at("c,d") - 1.0 / 12) < 1e-12);
    CHECK(std::abs(p.at("d,c") - 1.0 / 12) < 1e-12);
    CHECK(std::abs(p.at("d,d") - 1.0 / 12) < 1e-12);
  }

  TEST_CASE("two-outcome and detector partitions") {
    const auto p = born_probabilities(eq7_state(), ObservablePartition::per_mode("photon", {"a", "b"}));
    CHECK(std::abs(p.at("a") - 1.0 / 3) < 1e-12);
    CHECK(std::abs(p.at("b") - 2.0 / 3) < 1e-12);

    const Ket t = evolve(setups::triple_split_input(), setups::triple_split(0, 0)).back();
    const ObservablePartition det{"photon", {{"click", {"b"}}, {"no-click", {"a", "c"}}}};
    const auto q = born_probabilities(t, det);
    CHECK(std::abs(q.at("click") - 1.0 / 3) < 1e-12);
    CHECK(std::abs(q.at("no-click") - 2.0 / 3) < 1e-12);
  }

  TEST_CASE("partition validation") {
    const Ket k = eq7_state();
    CHECK(error_code([&] { born_probabilities(k, ObservablePartition::per_mode("photon", {"a"})); }) ==
          ErrorCode::BadPartition);
    const ObservablePartition overlap{"photon", {{"x", {"a", "b"}}, {"y", {"b"}}}};
    CHECK(error_code([&] { born_probabilities(k, overlap); }) == ErrorCode::BadPartition);
    CHECK(error_code([&] { born_probabilities(k, cd("other")); }) == ErrorCode::BadPartition);
  }

  TEST_CASE("property: probabilities sum to one and collapse lands on the class") {
    RngStream rng(31, "sum");
    const ObservablePartition p{"p", {{"lo", {"a", "b"}}, {"hi", {"c"}}, {"mid", {"d"}}}};
    for (int i = 0; i < 200; ++i) {
      const Ket k = normalize(testing_support::random_ket(rng, {{"p", {"a", "b", "c", "d"}}, {"q", {"x", "y"}}}));
      const auto probs = born_probabilities(k, p);
      double total = 0;
      for (const auto& [_, v] : probs) total += v;
      CHECK(std::abs(total - 1.0) < 1e-12);
      const Ket post = collapse(k, p, "lo");
      CHECK(std::abs(post.norm() - 1.0) < 1e-12);
      CHECK(post.modes("p") == std::set<std::string>{"a", "b"});
      CHECK(std::abs(project(k, p, "lo").norm_squared() - probs.at("lo")) < 1e-12);
    }
  }

  TEST_CASE("collapse onto an empty class") {
    const Ket k = basis_ket("p", "c");
    CHECK(error_code([&] { collapse(k, cd("p"), "d"); }) == ErrorCode::ImpossibleOutcome);
  }

  TEST_CASE("sampling converges and policies differ only in the post state") {
    const Ket k = eq7_state();
    const auto part = ObservablePartition::per_mode("photon", {"a", "b"});
    RngStream rng(32, "sample");
    const int n = 100000;
    int a = 0;
    for (int i = 0; i < n; ++i) {
      const auto o = sample(k, part, CollapsePolicy::Collapse, rng);
      if (o.label == "a") {
        ++a;
        REQUIRE(o.post_state.modes("photon") == std::set<std::string>{"a"});
      }
    }
    CHECK(std::abs(a / double(n) - 1.0 / 3) < 4 * binomial_sigma(1.0 / 3, n));
    RngStream r2(32, "unitary");
    const auto u = sample(k, part, CollapsePolicy::UnitaryOnly, r2);
    CHECK(u.post_state == k);
  }

  TEST_CASE("sampling is repeatable for a fixed stream") {
    const Ket k = eq7_state();
    const auto part = ObservablePartition::per_mode("photon", {"a", "b"});
    RngStream r1(5, "rep");
    RngStream r2(5, "rep");
    for (int i = 0; i < 100; ++i) {
      CHECK(sample(k, part, CollapsePolicy::Collapse, r1).label ==
            sample(k, part, CollapsePolicy::Collapse, r2).label);
    }
  }

  TEST_CASE("conditional state removes a pinned subsystem") {
    const Ket k = setups::hardy_frame_partial(setups::hardy_initial(), setups::HardyFrame::PlusOnly);
    const Ket cond = conditional_state(k, "p+", cd("p+"), "d");
    CHECK(cond.subsystems() == std::set<std::string>{"p-"});
    CHECK(std::abs(mode_marginals(cond, "p-")["u"] - 1.0) < 1e-12);
    CHECK(error_code([&] { conditional_state(k, "p-", cd("p+"), "d"); }) == ErrorCode::BadPartition);
  }

  TEST_CASE("policy names") {
    CHECK(to_string(CollapsePolicy::Collapse) == "collapse");
    CHECK(to_string(CollapsePolicy::UnitaryOnly) == "unitary");
  }
}
