#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qcollapse/rng.hpp"

namespace qcollapse {

/// Two-particle random discontinuous motion. The pair occupies one of two
/// joint configurations and both particles switch together at Poisson event
/// times. Leaving configuration c happens at rate 2 r w_{1-c}, which keeps the
/// configuration weights stationary and gives rate r for equal weights.
struct RdmConfig {
  double rate = 1.0;
  double duration = 10.0;
  double tick = 1e-3;
  std::array<double, 2> weights{0.5, 0.5};
  /// (particle-1 position, particle-2 position) for configurations 0 and 1.
  std::array<std::pair<std::string, std::string>, 2> configurations{
      std::pair<std::string, std::string>{"x1", "x2"},
      std::pair<std::string, std::string>{"x3", "x4"}};

  void validate() const;
  double leave_rate(int config) const { return 2.0 * rate * weights[1 - config]; }
};

struct JointConfiguration {
  int config_id = 0;
  std::pair<std::string, std::string> positions;

  friend bool operator==(const JointConfiguration&, const JointConfiguration&) = default;
};

/// Per-tick record of one run.
class RdmTrajectory {
 public:
  RdmTrajectory(const RdmConfig* cfg, std::vector<std::uint8_t> ids, std::uint64_t jumps)
      : cfg_(cfg), ids_(std::move(ids)), jumps_(jumps) {}

  std::size_t size() const noexcept { return ids_.size(); }
  double time(std::size_t i) const { return static_cast<double>(i) * cfg_->tick; }
  int config_id(std::size_t i) const { return ids_[i]; }
  JointConfiguration at(std::size_t i) const;
  /// Number of jump events (each switches both particles).
  std::uint64_t jumps() const noexcept { return jumps_; }

 private:
  const RdmConfig* cfg_;
  std::vector<std::uint8_t> ids_;
  std::uint64_t jumps_;
};

std::string sample_position(const std::map<std::string, double>& weights, RngStream& rng);

/// The returned trajectory refers to `cfg`, which must outlive it.
RdmTrajectory run_entangled(const RdmConfig& cfg, RngStream& rng);

/// Fraction of trials in which particle 1 read at t and particle 2 read at
/// t + delay belong to different joint configurations. The delay is rounded
/// to whole ticks.
double mismatch_fraction(const RdmConfig& cfg, double delay, std::uint64_t trials,
                         RngStream& rng);

}  // namespace qcollapse
