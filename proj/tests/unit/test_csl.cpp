#include <doctest.h>

#include <bit>
#include <cmath>
#include <filesystem>
#include <limits>

#include "qcollapse/csl.hpp"
#include "support.hpp"

using namespace qcollapse;
using testing_support::binomial_sigma;
using testing_support::error_code;

namespace {

SseState third() { return state_from_weights({1.0 / 3.0, 2.0 / 3.0}); }

// Root of the bracket 1 + sqrt(l) d x - (l/2) d^2 dt found by bisection.
double bracket_root(double lambda, double dt, double d) {
  const auto f = [&](double x) { return 1.0 + std::sqrt(lambda) * d * x - 0.5 * lambda * d * d * dt; };
  double lo = 0.0;
  double hi = d > 0 ? -100.0 : 100.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("qcollapse_test_" + name);
}

}  // namespace

TEST_SUITE("csl") {
  TEST_CASE("single step against a hand computation") {
    SseParams p;
    const SseState s = third();
    const double dW = 0.02;
    const SseState out = sse_step(s, p, dW);
    const double mean = 1.0 / 3.0;
    double c0 = std::sqrt(1.0 / 3.0) * (1.0 + (-1.0 - mean) * dW - 0.5 * p.dt * (-1.0 - mean) * (-1.0 - mean));
    double c1 = std::sqrt(2.0 / 3.0) * (1.0 + (1.0 - mean) * dW - 0.5 * p.dt * (1.0 - mean) * (1.0 - mean));
    const double n = std::hypot(c0, c1);
    CHECK(std::abs(out.amplitudes[0].real() - c0 / n) < 1e-15);
    CHECK(std::abs(out.amplitudes[1].real() - c1 / n) < 1e-15);
    CHECK(std::abs(out.time - p.dt) < 1e-18);
  }

  TEST_CASE("adversarial increment sits just past the bracket root") {
    SseParams p;
    const SseState s = third();
    const double root = bracket_root(p.lambda, p.dt, -4.0 / 3.0);
    const double adv = adversarial_increment(s, p);
    CHECK(std::abs(adv - root * 1.001) < 1e-12);
    CHECK(error_code([&] { sse_step(s, p, adv); }) == ErrorCode::NonPhysical);
    CHECK_FALSE(error_code([&] { sse_step(s, p, root * 0.999); }).has_value());
    const auto diag = detect_nonphysical(NoiseSequence{p.dt, {adv}}, s, p, false);
    CHECK(diag.verdict == NoiseVerdict::NonPhysical);
    CHECK(diag.step == 1);
  }

  TEST_CASE("a zero increment with lambda dt = 2 wipes an equal superposition") {
    SseParams p;
    p.dt = 2.0;
    CHECK(error_code([&] { sse_step(state_from_weights({0.5, 0.5}), p, 0.0); }) == ErrorCode::NonPhysical);
  }

  TEST_CASE("eigenstates admit no destabilizing increment") {
    SseParams p;
    CHECK(error_code([&] { adversarial_increment(state_from_weights({1.0, 0.0}), p); }) ==
          ErrorCode::InvalidArgument);
  }

  TEST_CASE("replay reproduces a trajectory bit for bit") {
    SseParams p;
    RngStream rng(81, "replay");
    const auto r = run_trajectory(third(), p, rng);
    CHECK(r.steps == r.noise.increments.size());
    CHECK(r.max_norm_error < 1e-12);
    const auto again = replay_trajectory(third(), p, r.noise);
    CHECK(again.steps == r.steps);
    CHECK(again.outcome == r.outcome);
    CHECK(again.final_state.amplitudes == r.final_state.amplitudes);
    NoiseSequence shorter = r.noise;
    shorter.increments.pop_back();
    if (!shorter.increments.empty()) {
      CHECK(error_code([&] { replay_trajectory(third(), p, shorter); }) == ErrorCode::MaxStepsExceeded);
    }
    const auto diag = detect_nonphysical(r.noise, third(), p, true);
    CHECK(diag.verdict == NoiseVerdict::Ok);
    CHECK(diag.converged);
    REQUIRE(diag.perturbation.has_value());
    const auto check = detect_nonphysical(perturb(r.noise, diag.perturbation->step, diag.perturbation->factor),
                                          third(), p, false);
    CHECK(check.verdict == diag.perturbation->verdict);
  }

  TEST_CASE("max steps") {
    SseParams p;
    p.max_steps = 3;
    RngStream rng(82, "max");
    CHECK(error_code([&] { run_trajectory(third(), p, rng); }) == ErrorCode::MaxStepsExceeded);
  }

  TEST_CASE("noise files round-trip exactly") {
    NoiseSequence n{1e-3, {0.1, -0.0, 1e-310, -3.0000000000000004, std::numeric_limits<double>::max(),
                           0.030000000000000002}};
    RngStream rng(83, "files");
    for (int i = 0; i < 1000; ++i) n.increments.push_back(rng.normal() * 0.0316);
    const auto csv = temp_file("noise.csv");
    const auto bin = temp_file("noise.bin");
    write_noise_csv(n, csv);
    write_noise_binary(n, bin);
    const auto from_csv = read_noise_csv(csv);
    const auto from_bin = read_noise_binary(bin);
    REQUIRE(from_csv.increments.size() == n.increments.size());
    for (std::size_t i = 0; i < n.increments.size(); ++i) {
      CHECK(std::bit_cast<std::uint64_t>(from_csv.increments[i]) == std::bit_cast<std::uint64_t>(n.increments[i]));
    }
    CHECK(from_bin == n);
    CHECK(from_csv.dt == n.dt);
    std::filesystem::remove(csv);
    std::filesystem::remove(bin);
    CHECK(error_code([] { read_noise_binary("/nonexistent/qcollapse.bin"); }) == ErrorCode::Io);
  }

  TEST_CASE("ensemble reproduces the initial weights") {
    SseParams p;
    RngStream rng(84, "ensemble");
    const auto stats = ensemble_stats(third(), p, 2000, rng);
    CHECK(stats.converged == 2000);
    CHECK(std::abs(stats.frequencies[0] - 1.0 / 3.0) < 4 * binomial_sigma(1.0 / 3.0, 2000));
    CHECK(stats.max_norm_error < 1e-9);
    for (const auto& c : stats.martingale) {
      CHECK(std::abs(c.mean_weight[0] - 1.0 / 3.0) <= 4.0 * c.sem[0] + 1e-12);
    }
    CHECK(error_code([&] { ensemble_stats(third(), p, 10, rng); }) == ErrorCode::InvalidArgument);
  }

  TEST_CASE("ensemble is repeatable and insensitive to a tenfold smaller step") {
    SseParams p;
    RngStream a(85, "rep");
    RngStream b(85, "rep");
    const auto s1 = ensemble_stats(third(), p, 500, a);
    const auto s2 = ensemble_stats(third(), p, 500, b);
    CHECK(s1.counts == s2.counts);
    CHECK(s1.mean_steps == s2.mean_steps);

    SseParams fine = p;
    fine.dt = 1e-4;
    RngStream c(86, "fine");
    const auto ref = ensemble_stats(third(), fine, 1000, c);
    RngStream d(87, "coarse");
    const auto coarse = ensemble_stats(third(), p, 1000, d);
    const double band = 4.0 * std::hypot(binomial_sigma(ref.frequencies[0], 1000),
                                         binomial_sigma(coarse.frequencies[0], 1000));
    CHECK(std::abs(ref.frequencies[0] - coarse.frequencies[0]) < band);
    // Time to selection is set by lambda, not by the step.
    CHECK(std::abs(ref.mean_steps * fine.dt - coarse.mean_steps * p.dt) < 0.25 * coarse.mean_steps * p.dt);
  }

  TEST_CASE("parameter validation") {
    SseParams p;
    p.lambda = 0.0;
    CHECK(error_code([&] { p.validate(); }) == ErrorCode::InvalidArgument);
    SseParams q;
    CHECK(error_code([&] { sse_step(state_from_weights({0.5, 0.4}), q, 0.0); }) == ErrorCode::InvalidArgument);
  }
}
