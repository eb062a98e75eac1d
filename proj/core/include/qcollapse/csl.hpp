#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qcollapse/rng.hpp"
#include "qcollapse/statevec.hpp"

namespace qcollapse {

/// Pure-collapse stochastic Schroedinger equation over a finite eigenbasis of
/// the collapse operator A, integrated by Euler-Maruyama with renormalization:
///
///   c_i <- c_i [1 + sqrt(lambda) (a_i - <A>) dW - (lambda/2) (a_i - <A>)^2 dt]
///
/// followed by c <- c / |c|. dW ~ N(0, dt).
struct SseParams {
  double lambda = 1.0;
  double dt = 1e-3;
  std::vector<double> eigenvalues{-1.0, 1.0};
  std::uint64_t max_steps = 1'000'000;
  double eps_conv = 1e-4;
  /// Steps at which ensemble runs record the mean of each |c_i|^2.
  std::vector<std::uint64_t> checkpoints{0, 50, 100, 200, 400, 800, 1600, 3200, 6400};

  void validate() const;
};

struct SseState {
  std::vector<Complex> amplitudes;
  double time = 0.0;

  std::vector<double> weights() const;
  double norm_squared() const;
};

/// Recorded Wiener increments, replayable bit-for-bit.
struct NoiseSequence {
  double dt = 0.0;
  std::vector<double> increments;

  friend bool operator==(const NoiseSequence&, const NoiseSequence&) = default;
};

/// One Euler-Maruyama step. Throws NonPhysical when an occupied component's
/// bracket is <= 0 (the step annihilates or flips that amplitude), when the
/// pre-renormalization norm is not positive, or when anything is non-finite.
SseState sse_step(const SseState& s, const SseParams& p, double dW);

/// Increment that drives the bracket of the most off-centre occupied component
/// past its root by the relative `margin`.
double adversarial_increment(const SseState& s, const SseParams& p, double margin = 1e-3);

struct TrajectoryResult {
  std::size_t outcome = 0;
  NoiseSequence noise;
  std::uint64_t steps = 0;
  SseState final_state;
  /// Largest |sum |c_i|^2 - 1| seen after any step.
  double max_norm_error = 0.0;
};

/// Steps until some |c_i|^2 >= 1 - eps_conv. At least one step is taken.
TrajectoryResult run_trajectory(const SseState& initial, const SseParams& p, RngStream& rng);

/// Deterministic re-run with recorded increments. Throws MaxStepsExceeded when
/// the sequence ends before convergence.
TrajectoryResult replay_trajectory(const SseState& initial, const SseParams& p,
                                   const NoiseSequence& noise);

struct CheckpointStats {
  std::uint64_t step = 0;
  std::vector<double> mean_weight;
  std::vector<double> sem;
};

struct EnsembleStats {
  std::uint64_t trajectories = 0;
  std::uint64_t converged = 0;
  std::uint64_t nonphysical = 0;
  std::uint64_t max_steps_exceeded = 0;
  std::vector<std::uint64_t> counts;
  std::vector<double> frequencies;  // counts / converged
  std::vector<CheckpointStats> martingale;
  double max_norm_error = 0.0;
  double mean_steps = 0.0;
};

/// Runs `n_traj` (>= 100) independent trajectories on split streams. A
/// trajectory that stops before a checkpoint contributes its final weights.
EnsembleStats ensemble_stats(const SseState& initial, const SseParams& p, std::uint64_t n_traj,
                             RngStream& rng);

enum class NoiseVerdict { Ok, NonPhysical, Diverged };

std::string_view to_string(NoiseVerdict v) noexcept;

struct NoisePerturbation {
  std::uint64_t step = 0;  // 1-based
  double factor = 1.0;
  NoiseVerdict verdict = NoiseVerdict::Ok;
};

struct NoiseDiagnosis {
  NoiseVerdict verdict = NoiseVerdict::Ok;
  std::uint64_t step = 0;  // 1-based step of failure, 0 when ok
  bool converged = false;
  /// Smallest single-increment scaling (over the factor grid) that turns an
  /// ok sequence bad. Only searched for ok sequences.
  std::optional<NoisePerturbation> perturbation;
};

inline const std::vector<double> kPerturbationFactors{2, 5, 10, 20, 50, 100, 200, 500, 1000};

/// Replays `noise` from `initial` and classifies it. With `search` set, also
/// looks for the smallest destabilizing single-increment perturbation.
NoiseDiagnosis detect_nonphysical(const NoiseSequence& noise, const SseState& initial,
                                  const SseParams& p, bool search = true);

/// Copy of `noise` with the increment at 1-based `step` multiplied by `factor`.
NoiseSequence perturb(const NoiseSequence& noise, std::uint64_t step, double factor);

void write_noise_csv(const NoiseSequence& noise, const std::filesystem::path& path);
NoiseSequence read_noise_csv(const std::filesystem::path& path);
void write_noise_binary(const NoiseSequence& noise, const std::filesystem::path& path);
NoiseSequence read_noise_binary(const std::filesystem::path& path);

/// Real, non-negative amplitudes sqrt(w_i).
SseState state_from_weights(const std::vector<double>& weights);

}  // namespace qcollapse
