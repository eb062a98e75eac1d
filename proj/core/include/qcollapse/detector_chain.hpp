#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qcollapse/rng.hpp"
#include "qcollapse/statevec.hpp"

namespace qcollapse {

/// Which wave-packet reaches the detector first. The first packet perturbs
/// the A particles, the second the B particles.
enum class PacketRole { First, Second };

/// One branch of the photon-plus-detector state: the packet's amplitude and
/// how many detector particles are perturbed in that branch.
struct ChainBranch {
  std::string label;
  PacketRole role = PacketRole::First;
  Complex amplitude{};
  std::uint64_t perturbed_a = 0;  // N
  std::uint64_t perturbed_b = 0;  // K
  /// Own perturbed count after each step; entry 0 is the seeded value.
  std::vector<std::uint64_t> history;

  std::uint64_t own_count() const { return role == PacketRole::First ? perturbed_a : perturbed_b; }
};

inline constexpr std::uint64_t kDefaultPool = 1'000'000'000'000ULL;
inline constexpr std::uint64_t kDefaultMacroscopic = 1'000'000ULL;

/// Branch-resolved amplification state. Branch amplitudes, not per-particle
/// kets, are stored: the particle states are symmetric, so (amplitude, N, K)
/// is a complete summary.
///
/// The constructor enforces the disjointness invariant: the first packet's
/// branch has K = 0, the second packet's branch has N = 0.
class ChainState {
 public:
  ChainState(std::vector<ChainBranch> branches, std::uint64_t pool_a, std::uint64_t pool_b,
             std::uint64_t steps_elapsed = 0, bool normalized = true);

  const std::vector<ChainBranch>& branches() const noexcept { return branches_; }
  std::uint64_t pool_a() const noexcept { return pool_a_; }
  std::uint64_t pool_b() const noexcept { return pool_b_; }
  std::uint64_t steps_elapsed() const noexcept { return steps_elapsed_; }

  const ChainBranch* find(const std::string& label) const;

 private:
  std::vector<ChainBranch> branches_;
  std::uint64_t pool_a_;
  std::uint64_t pool_b_;
  std::uint64_t steps_elapsed_;
};

ChainState seed(const Ket& photon, std::uint64_t n_initial, std::uint64_t pool_a = kDefaultPool,
                std::uint64_t pool_b = kDefaultPool);

struct AmplifyParams {
  std::uint64_t steps = 0;
  double growth = 2.0;
  /// Absolute step index at the end of which the second packet has perturbed
  /// `k_initial` B particles. Unset: it never arrives.
  std::optional<std::uint64_t> second_arrival_step;
  std::uint64_t k_initial = 1;
};

/// Geometric growth of each branch's own perturbed set, rounding up.
ChainState amplify(const ChainState& cs, const AmplifyParams& params);

/// Total amplitude of configurations with both N > 0 and K > 0.
Complex cross_branch_amplitude(const ChainState& cs);

/// Perturbed count left by the packet `label`; 0 when its branch is gone.
std::uint64_t perturbed_count(const ChainState& cs, const std::string& label);

struct CollapseReport {
  std::string selected_branch;
  std::uint64_t steps_to_threshold = 0;
  std::uint64_t final_n = 0;
  std::uint64_t final_k = 0;
  std::optional<std::string> losing_branch;
  std::uint64_t losing_count = 0;
  ChainState post_state;
};

CollapseReport threshold_collapse(const ChainState& cs, std::uint64_t n_macro, RngStream& rng);

}  // namespace qcollapse
