#include <doctest.h>

#include <cmath>

#include "qcollapse/frames.hpp"
#include "support.hpp"

using namespace qcollapse;
using testing_support::error_code;

namespace {

const std::string P = setups::kPlus;
const std::string M = setups::kMinus;

std::vector<MeasurementOrdering> hardy_orderings() {
  return {setups::hardy_ordering(setups::HardyOrdering::Lab),
          setups::hardy_ordering(setups::HardyOrdering::FramePlus),
          setups::hardy_ordering(setups::HardyOrdering::FrameMinus)};
}

}  // namespace

TEST_SUITE("frames") {
  TEST_CASE("every ordering assigns (d+, d-) the same probability") {
    for (const auto& o : hardy_orderings()) {
      const auto ev = evolve_ordered(setups::hardy_initial(), o, {{P, "d"}, {M, "d"}});
      CHECK(std::abs(ev.probability - 1.0 / 12) < 1e-12);
      CHECK(ev.snapshots.size() == o.steps.size());
    }
  }

  TEST_CASE("frame-plus snapshot after the first detection holds p- on u") {
    const auto ev = evolve_ordered(setups::hardy_initial(),
                                   setups::hardy_ordering(setups::HardyOrdering::FramePlus),
                                   {{P, "d"}, {M, "d"}});
    const Ket& after = ev.snapshots.at(1).state;
    CHECK(std::abs(mode_marginals(after, M)["u"] - 1.0) < 1e-10);
  }

  TEST_CASE("retrodiction: (d+, d-) contradicts the initial state, (c+, c-) does not") {
    const Ket k0 = setups::hardy_initial();
    const auto dd = retrodiction_report(k0, hardy_orderings(), {{P, "d"}, {M, "d"}});
    CHECK(dd.contradiction);
    const BasisLabel uu{{P, "u"}, {M, "u"}};
    CHECK(dd.missing_from_initial.contains(uu));
    CHECK(k0.amplitude(uu) == Complex{});
    CHECK(dd.forced_support.at("frame-plus").contains(BasisLabel{{M, "u"}}));
    CHECK(dd.forced_support.at("frame-minus").contains(BasisLabel{{P, "u"}}));

    const auto cc = retrodiction_report(k0, hardy_orderings(), {{P, "c"}, {M, "c"}});
    CHECK_FALSE(cc.contradiction);
  }

  TEST_CASE("retrodiction is monotone in the set of orderings") {
    const Ket k0 = setups::hardy_initial();
    const auto one = retrodiction_report(k0, {hardy_orderings()[1]}, {{P, "d"}, {M, "d"}});
    CHECK_FALSE(one.contradiction);
    const auto all = retrodiction_report(k0, hardy_orderings(), {{P, "d"}, {M, "d"}});
    for (const auto& l : one.missing_from_initial) CHECK(all.missing_from_initial.contains(l));
  }

  TEST_CASE("ordering errors") {
    const Ket k0 = setups::hardy_initial();
    const auto lab = setups::hardy_ordering(setups::HardyOrdering::Lab);
    CHECK(error_code([&] { evolve_ordered(k0, lab, {{P, "d"}}); }) == ErrorCode::BadOrdering);
    MeasurementOrdering twice{"twice", lab.steps};
    twice.steps.push_back(MeasureStep{setups::hardy_detectors(P)});
    CHECK(error_code([&] { evolve_ordered(k0, twice, {{P, "d"}, {M, "d"}}); }) == ErrorCode::BadOrdering);
    // u+u- has no amplitude, so conditioning on p+ at u right away is impossible
    // once p- is already pinned to u.
    MeasurementOrdering direct{"direct", {MeasureStep{ObservablePartition::per_mode(M, {"u", "v"})},
                                          MeasureStep{ObservablePartition::per_mode(P, {"u", "v"})}}};
    CHECK(error_code([&] { evolve_ordered(k0, direct, {{M, "u"}, {P, "u"}}); }) ==
          ErrorCode::ImpossibleOutcome);
  }

  TEST_CASE("property: p+ marginal is ordering independent for random states and splitters") {
    RngStream rng(41, "nosignal");
    for (int n = 0; n < 100; ++n) {
      const Ket k0 = normalize(testing_support::random_ket(rng, {{P, {"u", "v"}}, {M, {"u", "v"}}}));
      const BeamSplitter bp{P, {"u", "v"}, {"c", "d"}, rng.uniform(), true};
      const BeamSplitter bm{M, {"u", "v"}, {"c", "d"}, rng.uniform(), false};
      const auto dp = ObservablePartition::per_mode(P, {"c", "d"});
      const auto dm = ObservablePartition::per_mode(M, {"c", "d"});
      const MeasurementOrdering plus_first{"pf", {ApplyStep{bp}, MeasureStep{dp}, ApplyStep{bm}, MeasureStep{dm}}};
      const MeasurementOrdering minus_first{"mf", {ApplyStep{bm}, MeasureStep{dm}, ApplyStep{bp}, MeasureStep{dp}}};
      const auto marginal = [&](const MeasurementOrdering& o) {
        double total = 0.0;
        for (const std::string x : {"c", "d"}) {
          try {
            total += evolve_ordered(k0, o, {{P, "d"}, {M, x}}).probability;
          } catch (const Error& e) {
            REQUIRE(e.code() == ErrorCode::ImpossibleOutcome);
          }
        }
        return total;
      };
      CHECK(std::abs(marginal(plus_first) - marginal(minus_first)) < 1e-12);
    }
  }
}
