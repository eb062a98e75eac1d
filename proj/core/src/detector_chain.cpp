#include "qcollapse/detector_chain.hpp"

#include <cmath>

#include "qcollapse/error.hpp"

namespace qcollapse {

namespace {

std::uint64_t grow(std::uint64_t count, double g, std::uint64_t pool, std::uint64_t step,
                   const std::string& label) {
  const double next = std::ceil(static_cast<double>(count) * g);
  if (next > static_cast<double>(pool)) {
    throw Error(ErrorCode::PoolExhausted, "branch '" + label + "' exceeds its pool of " +
                                              std::to_string(pool) + " particles at step " +
                                              std::to_string(step));
  }
  return static_cast<std::uint64_t>(next);
}

}  // namespace

ChainState::ChainState(std::vector<ChainBranch> branches, std::uint64_t pool_a,
                       std::uint64_t pool_b, std::uint64_t steps_elapsed, bool normalized)
    : branches_(std::move(branches)), pool_a_(pool_a), pool_b_(pool_b),
      steps_elapsed_(steps_elapsed) {
  if (branches_.empty() || branches_.size() > 2) {
    throw Error(ErrorCode::InvalidChainState, "a chain state holds one or two branches");
  }
  if (branches_.size() == 2 && branches_[0].role == branches_[1].role) {
    throw Error(ErrorCode::InvalidChainState, "both branches claim the same packet role");
  }
  double weight = 0.0;
  for (auto& b : branches_) {
    if (b.role == PacketRole::First && b.perturbed_b != 0) {
      throw Error(ErrorCode::InvalidChainState,
                  "first packet's branch '" + b.label + "' cannot perturb B particles");
    }
    if (b.role == PacketRole::Second && b.perturbed_a != 0) {
      throw Error(ErrorCode::InvalidChainState,
                  "second packet's branch '" + b.label + "' cannot perturb A particles");
    }
    if (b.perturbed_a > pool_a_ || b.perturbed_b > pool_b_) {
      throw Error(ErrorCode::InvalidChainState, "perturbed count exceeds pool size");
    }
    if (b.history.empty()) b.history.push_back(b.own_count());
    weight += std::norm(b.amplitude);
  }
  if (normalized && std::abs(weight - 1.0) > 1e-12) {
    throw Error(ErrorCode::InvalidChainState, "branch weights sum to " + std::to_string(weight));
  }
}

const ChainBranch* ChainState::find(const std::string& label) const {
  for (const auto& b : branches_) {
    if (b.label == label) return &b;
  }
  return nullptr;
}

ChainState seed(const Ket& photon, std::uint64_t n_initial, std::uint64_t pool_a,
                std::uint64_t pool_b) {
  if (n_initial == 0) throw Error(ErrorCode::InvalidArgument, "n_initial must be at least 1");
  if (n_initial > pool_a) throw Error(ErrorCode::PoolExhausted, "n_initial exceeds the A pool");
  const auto subsystems = photon.subsystems();
  if (subsystems.size() != 1) {
    throw Error(ErrorCode::UnsupportedTopology, "photon ket must address exactly one subsystem");
  }
  if (std::abs(photon.norm_squared() - 1.0) > 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "photon ket is not normalized");
  }
  if (photon.size() > 2) {
    throw Error(ErrorCode::UnsupportedTopology,
                "photon has " + std::to_string(photon.size()) + " packets; at most 2 supported");
  }
  const std::string& subsystem = *subsystems.begin();
  std::vector<ChainBranch> branches;
  for (const auto& [label, amp] : photon.terms()) {
    ChainBranch b;
    b.label = *label.mode_of(subsystem);
    b.amplitude = amp;
    if (branches.empty()) {
      b.role = PacketRole::First;
      b.perturbed_a = n_initial;
    } else {
      b.role = PacketRole::Second;
    }
    branches.push_back(std::move(b));
  }
  return ChainState(std::move(branches), pool_a, pool_b);
}

ChainState amplify(const ChainState& cs, const AmplifyParams& params) {
  if (!(params.growth > 1.0)) throw Error(ErrorCode::InvalidArgument, "growth must exceed 1");
  auto branches = cs.branches();
  std::uint64_t step = cs.steps_elapsed();
  for (std::uint64_t n = 0; n < params.steps; ++n) {
    ++step;
    for (auto& b : branches) {
      if (b.role == PacketRole::First) {
        if (b.perturbed_a > 0) b.perturbed_a = grow(b.perturbed_a, params.growth, cs.pool_a(), step, b.label);
      } else {
        if (b.perturbed_b > 0) b.perturbed_b = grow(b.perturbed_b, params.growth, cs.pool_b(), step, b.label);
        if (params.second_arrival_step && *params.second_arrival_step == step) {
          if (params.k_initial > cs.pool_b()) {
            throw Error(ErrorCode::PoolExhausted,
                        "k_initial exceeds the B pool at step " + std::to_string(step));
          }
          b.perturbed_b = params.k_initial;
        }
      }
      b.history.push_back(b.own_count());
    }
  }
  return ChainState(std::move(branches), cs.pool_a(), cs.pool_b(), step);
}

Complex cross_branch_amplitude(const ChainState& cs) {
  Complex total{};
  for (const auto& b : cs.branches()) {
    if (b.perturbed_a > 0 && b.perturbed_b > 0) total += b.amplitude;
  }
  return total;
}

std::uint64_t perturbed_count(const ChainState& cs, const std::string& label) {
  const ChainBranch* b = cs.find(label);
  return b ? b->own_count() : 0;
}

CollapseReport threshold_collapse(const ChainState& cs, std::uint64_t n_macro, RngStream& rng) {
  std::optional<std::uint64_t> first_macro;
  for (const auto& b : cs.branches()) {
    for (std::size_t i = 0; i < b.history.size(); ++i) {
      if (b.history[i] >= n_macro) {
        if (!first_macro || i < *first_macro) first_macro = i;
        break;
      }
    }
  }
  if (!first_macro) {
    throw Error(ErrorCode::NotMacroscopic,
                "no branch has reached " + std::to_string(n_macro) + " perturbed particles");
  }

  double total = 0.0;
  for (const auto& b : cs.branches()) total += std::norm(b.amplitude);
  const double u = rng.uniform() * total;
  const auto& branches = cs.branches();
  std::size_t chosen = branches.size() - 1;
  double cumulative = 0.0;
  for (std::size_t i = 0; i < branches.size(); ++i) {
    cumulative += std::norm(branches[i].amplitude);
    if (u < cumulative) {
      chosen = i;
      break;
    }
  }

  ChainBranch winner = branches[chosen];
  winner.amplitude /= std::abs(winner.amplitude);
  ChainState post({winner}, cs.pool_a(), cs.pool_b(), cs.steps_elapsed());

  CollapseReport report{winner.label,
                        *first_macro,
                        winner.perturbed_a,
                        winner.perturbed_b,
                        std::nullopt,
                        0,
                        post};
  if (branches.size() == 2) {
    const auto& loser = branches[1 - chosen];
    report.losing_branch = loser.label;
    report.losing_count = perturbed_count(post, loser.label);
  }
  return report;
}

}  // namespace qcollapse
