#include "qcollapse/rdm.hpp"

#include <cmath>
#include <limits>

#include "qcollapse/error.hpp"
#include "qcollapse/parallel.hpp"

namespace qcollapse {

namespace {

constexpr std::uint64_t kTrialsPerBlock = 4096;

int draw_config(const RdmConfig& cfg, RngStream& rng) {
  return rng.uniform() < cfg.weights[0] ? 0 : 1;
}

double next_jump(const RdmConfig& cfg, int config, RngStream& rng) {
  const double rate = cfg.leave_rate(config);
  return rate > 0.0 ? rng.exponential(rate) : std::numeric_limits<double>::infinity();
}

}  // namespace

void RdmConfig::validate() const {
  if (!(tick > 0.0)) throw Error(ErrorCode::InvalidArgument, "tick must be positive");
  if (rate < 0.0) throw Error(ErrorCode::InvalidArgument, "jump rate must be non-negative");
  if (duration < 0.0) throw Error(ErrorCode::InvalidArgument, "duration must be non-negative");
  if (weights[0] < 0.0 || weights[1] < 0.0 || std::abs(weights[0] + weights[1] - 1.0) > 1e-12) {
    throw Error(ErrorCode::BadWeights, "configuration weights must be a distribution");
  }
}

JointConfiguration RdmTrajectory::at(std::size_t i) const {
  const int id = ids_[i];
  return {id, cfg_->configurations[static_cast<std::size_t>(id)]};
}

std::string sample_position(const std::map<std::string, double>& weights, RngStream& rng) {
  if (weights.empty()) throw Error(ErrorCode::BadWeights, "no positions");
  double total = 0.0;
  for (const auto& [pos, w] : weights) {
    if (w < 0.0) throw Error(ErrorCode::BadWeights, "negative weight for '" + pos + "'");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorCode::BadWeights, "weights sum to " + std::to_string(total));
  }
  const double u = rng.uniform();
  double cumulative = 0.0;
  const std::string* last = nullptr;
  for (const auto& [pos, w] : weights) {
    if (w <= 0.0) continue;
    cumulative += w;
    last = &pos;
    if (u < cumulative) return pos;
  }
  return *last;
}

RdmTrajectory run_entangled(const RdmConfig& cfg, RngStream& rng) {
  cfg.validate();
  const auto ticks = static_cast<std::size_t>(std::llround(cfg.duration / cfg.tick)) + 1;
  std::vector<std::uint8_t> ids(ticks);
  int config = draw_config(cfg, rng);
  double next = next_jump(cfg, config, rng);
  std::uint64_t jumps = 0;
  ids[0] = static_cast<std::uint8_t>(config);
  for (std::size_t i = 1; i < ticks; ++i) {
    const double t = static_cast<double>(i) * cfg.tick;
    while (next <= t) {
      config = 1 - config;
      ++jumps;
      next += next_jump(cfg, config, rng);
    }
    ids[i] = static_cast<std::uint8_t>(config);
  }
  return RdmTrajectory(&cfg, std::move(ids), jumps);
}

double mismatch_fraction(const RdmConfig& cfg, double delay, std::uint64_t trials,
                         RngStream& rng) {
  cfg.validate();
  if (delay < 0.0) throw Error(ErrorCode::InvalidArgument, "delay must be non-negative");
  if (trials == 0) throw Error(ErrorCode::InvalidArgument, "need at least one trial");
  const double window = static_cast<double>(std::llround(delay / cfg.tick)) * cfg.tick;

  const std::uint64_t blocks = (trials + kTrialsPerBlock - 1) / kTrialsPerBlock;
  std::vector<std::uint64_t> mismatches(blocks, 0);
  const RngStream base(rng.engine()(), "mismatch");
  for_each_block(blocks, [&](std::size_t b) {
    RngStream local = base.split(static_cast<std::uint64_t>(b));
    const std::uint64_t begin = b * kTrialsPerBlock;
    const std::uint64_t end = std::min(trials, begin + kTrialsPerBlock);
    std::uint64_t count = 0;
    for (std::uint64_t n = begin; n < end; ++n) {
      const int first = draw_config(cfg, local);
      int config = first;
      double t = next_jump(cfg, config, local);
      while (t < window) {
        config = 1 - config;
        t += next_jump(cfg, config, local);
      }
      if (config != first) ++count;
    }
    mismatches[b] = count;
  });

  std::uint64_t total = 0;
  for (auto m : mismatches) total += m;
  return static_cast<double>(total) / static_cast<double>(trials);
}

}  // namespace qcollapse
