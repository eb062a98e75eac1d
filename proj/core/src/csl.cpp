#include "qcollapse/csl.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qcollapse/error.hpp"
#include "qcollapse/parallel.hpp"

namespace qcollapse {

namespace {

constexpr std::uint64_t kTrajectoriesPerBlock = 256;
constexpr char kBinaryMagic[8] = {'Q', 'C', 'N', 'O', 'I', 'S', 'E', '1'};

enum class StepStatus { Ok, NonPhysical, Diverged };

// In-place step; on failure `c` is left in an unspecified state.
StepStatus step_in_place(std::vector<Complex>& c, const SseParams& p, double dW) {
  if (!std::isfinite(dW)) return StepStatus::Diverged;
  double mean = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) mean += p.eigenvalues[i] * std::norm(c[i]);
  const double root_lambda = std::sqrt(p.lambda);
  const double half_lambda_dt = 0.5 * p.lambda * p.dt;
  double norm2 = 0.0;
  bool annihilated = false;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double d = p.eigenvalues[i] - mean;
    const double bracket = 1.0 + root_lambda * d * dW - half_lambda_dt * d * d;
    if (!std::isfinite(bracket)) return StepStatus::Diverged;
    if (c[i] != Complex{} && bracket <= 0.0) annihilated = true;
    c[i] *= bracket;
    norm2 += std::norm(c[i]);
  }
  if (!std::isfinite(norm2)) return StepStatus::Diverged;
  if (annihilated || !(norm2 > 0.0)) return StepStatus::NonPhysical;
  const double inv = 1.0 / std::sqrt(norm2);
  for (auto& x : c) x *= inv;
  return StepStatus::Ok;
}

double max_weight(const std::vector<Complex>& c, std::size_t* index) {
  double best = -1.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double w = std::norm(c[i]);
    if (w > best) {
      best = w;
      *index = i;
    }
  }
  return best;
}

double norm_error(const std::vector<Complex>& c) {
  double s = 0.0;
  for (const auto& x : c) s += std::norm(x);
  return std::abs(s - 1.0);
}

void check_initial(const SseState& s, const SseParams& p) {
  p.validate();
  if (s.amplitudes.size() != p.eigenvalues.size()) {
    throw Error(ErrorCode::InvalidArgument, "state dimension does not match the spectrum");
  }
  if (std::abs(s.norm_squared() - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "initial state is not normalized");
  }
}

// Runs until convergence. `next_dw(step)` yields the increment for the
// 1-based step or nullopt when the noise source is exhausted.
// `on_step(step, amplitudes)` observes the state after each step.
template <typename NextDw, typename OnStep>
TrajectoryResult integrate(const SseState& initial, const SseParams& p, NextDw&& next_dw,
                           OnStep&& on_step) {
  TrajectoryResult r;
  r.noise.dt = p.dt;
  std::vector<Complex> c = initial.amplitudes;
  for (std::uint64_t step = 1;; ++step) {
    if (step > p.max_steps) {
      throw Error(ErrorCode::MaxStepsExceeded,
                  "no eigenstate selected within " + std::to_string(p.max_steps) + " steps");
    }
    const std::optional<double> dW = next_dw(step);
    if (!dW) {
      throw Error(ErrorCode::MaxStepsExceeded,
                  "noise sequence ended after " + std::to_string(step - 1) + " steps");
    }
    r.noise.increments.push_back(*dW);
    const StepStatus status = step_in_place(c, p, *dW);
    if (status != StepStatus::Ok) {
      throw Error(ErrorCode::NonPhysical,
                  std::string(status == StepStatus::Diverged ? "diverged" : "non-physical") +
                      " solution at step " + std::to_string(step));
    }
    r.max_norm_error = std::max(r.max_norm_error, norm_error(c));
    on_step(step, c);
    std::size_t idx = 0;
    if (max_weight(c, &idx) >= 1.0 - p.eps_conv) {
      r.outcome = idx;
      r.steps = step;
      r.final_state = {std::move(c), initial.time + static_cast<double>(step) * p.dt};
      return r;
    }
  }
}

std::string format17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(std::string_view text, const std::filesystem::path& path) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::Format, path.string() + ": bad number '" + std::string(text) + "'");
  }
  return v;
}

void put_u64(std::ostream& os, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(bytes, 8);
}

std::uint64_t get_u64(std::istream& is, const std::filesystem::path& path) {
  unsigned char bytes[8];
  if (!is.read(reinterpret_cast<char*>(bytes), 8)) {
    throw Error(ErrorCode::Format, path.string() + ": truncated noise file");
  }
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

}  // namespace

void SseParams::validate() const {
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be positive");
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  if (!(eps_conv > 0.0 && eps_conv < 0.5)) {
    throw Error(ErrorCode::InvalidArgument, "eps_conv must lie in (0, 0.5)");
  }
  if (eigenvalues.empty()) throw Error(ErrorCode::InvalidArgument, "empty spectrum");
}

std::vector<double> SseState::weights() const {
  std::vector<double> w(amplitudes.size());
  for (std::size_t i = 0; i < amplitudes.size(); ++i) w[i] = std::norm(amplitudes[i]);
  return w;
}

double SseState::norm_squared() const {
  double s = 0.0;
  for (const auto& c : amplitudes) s += std::norm(c);
  return s;
}

SseState sse_step(const SseState& s, const SseParams& p, double dW) {
  check_initial(s, p);
  SseState out{s.amplitudes, s.time + p.dt};
  switch (step_in_place(out.amplitudes, p, dW)) {
    case StepStatus::Ok: return out;
    case StepStatus::NonPhysical:
      throw Error(ErrorCode::NonPhysical, "step annihilates an occupied component");
    case StepStatus::Diverged:
      throw Error(ErrorCode::NonPhysical, "step produces non-finite amplitudes");
  }
  return out;
}

double adversarial_increment(const SseState& s, const SseParams& p, double margin) {
  check_initial(s, p);
  double mean = 0.0;
  for (std::size_t i = 0; i < s.amplitudes.size(); ++i) {
    mean += p.eigenvalues[i] * std::norm(s.amplitudes[i]);
  }
  double d = 0.0;
  for (std::size_t i = 0; i < s.amplitudes.size(); ++i) {
    if (s.amplitudes[i] == Complex{}) continue;
    const double di = p.eigenvalues[i] - mean;
    if (std::abs(di) > std::abs(d)) d = di;
  }
  if (d == 0.0) {
    throw Error(ErrorCode::InvalidArgument, "eigenstate input: no increment is destabilizing");
  }
  const double q = 0.5 * p.lambda * p.dt * d * d;
  const double root = (q - 1.0) / (std::sqrt(p.lambda) * d);
  return root * (1.0 + margin);
}

TrajectoryResult run_trajectory(const SseState& initial, const SseParams& p, RngStream& rng) {
  check_initial(initial, p);
  const double sqrt_dt = std::sqrt(p.dt);
  return integrate(
      initial, p, [&](std::uint64_t) -> std::optional<double> { return sqrt_dt * rng.normal(); },
      [](std::uint64_t, const std::vector<Complex>&) {});
}

TrajectoryResult replay_trajectory(const SseState& initial, const SseParams& p,
                                   const NoiseSequence& noise) {
  check_initial(initial, p);
  return integrate(
      initial, p,
      [&](std::uint64_t step) -> std::optional<double> {
        if (step > noise.increments.size()) return std::nullopt;
        return noise.increments[step - 1];
      },
      [](std::uint64_t, const std::vector<Complex>&) {});
}

EnsembleStats ensemble_stats(const SseState& initial, const SseParams& p, std::uint64_t n_traj,
                             RngStream& rng) {
  check_initial(initial, p);
  if (n_traj < 100) throw Error(ErrorCode::InvalidArgument, "ensemble needs >= 100 trajectories");
  const std::size_t dim = initial.amplitudes.size();
  const std::size_t n_check = p.checkpoints.size();

  struct Block {
    std::uint64_t converged = 0, nonphysical = 0, max_steps = 0, step_sum = 0;
    std::vector<std::uint64_t> counts;
    std::vector<double> sum, sum_sq;  // [checkpoint * dim + i]
    double max_norm_error = 0.0;
  };
  const std::uint64_t n_blocks = (n_traj + kTrajectoriesPerBlock - 1) / kTrajectoriesPerBlock;
  std::vector<Block> blocks(n_blocks);
  const RngStream base(rng.engine()(), "csl-ensemble");
  const double sqrt_dt = std::sqrt(p.dt);

  for_each_block(n_blocks, [&](std::size_t b) {
    Block& out = blocks[b];
    out.counts.assign(dim, 0);
    out.sum.assign(n_check * dim, 0.0);
    out.sum_sq.assign(n_check * dim, 0.0);
    std::vector<double> samples(n_check * dim);
    const std::uint64_t begin = b * kTrajectoriesPerBlock;
    const std::uint64_t end = std::min(n_traj, begin + kTrajectoriesPerBlock);
    for (std::uint64_t t = begin; t < end; ++t) {
      RngStream local = base.split(t);
      std::size_t next_check = 0;
      auto record_until = [&](std::uint64_t step, const std::vector<Complex>& c, bool final) {
        while (next_check < n_check && (p.checkpoints[next_check] <= step || final)) {
          for (std::size_t i = 0; i < dim; ++i) samples[next_check * dim + i] = std::norm(c[i]);
          ++next_check;
        }
      };
      record_until(0, initial.amplitudes, false);
      try {
        auto r = integrate(
            initial, p,
            [&](std::uint64_t) -> std::optional<double> { return sqrt_dt * local.normal(); },
            [&](std::uint64_t step, const std::vector<Complex>& c) { record_until(step, c, false); });
        record_until(r.steps, r.final_state.amplitudes, true);
        ++out.converged;
        ++out.counts[r.outcome];
        out.step_sum += r.steps;
        out.max_norm_error = std::max(out.max_norm_error, r.max_norm_error);
        for (std::size_t k = 0; k < samples.size(); ++k) {
          out.sum[k] += samples[k];
          out.sum_sq[k] += samples[k] * samples[k];
        }
      } catch (const Error& e) {
        if (e.code() == ErrorCode::NonPhysical) ++out.nonphysical;
        else if (e.code() == ErrorCode::MaxStepsExceeded) ++out.max_steps;
        else throw;
      }
    }
  });

  EnsembleStats stats;
  stats.trajectories = n_traj;
  stats.counts.assign(dim, 0);
  std::vector<double> sum(n_check * dim, 0.0), sum_sq(n_check * dim, 0.0);
  std::uint64_t step_sum = 0;
  for (const auto& b : blocks) {
    stats.converged += b.converged;
    stats.nonphysical += b.nonphysical;
    stats.max_steps_exceeded += b.max_steps;
    step_sum += b.step_sum;
    stats.max_norm_error = std::max(stats.max_norm_error, b.max_norm_error);
    for (std::size_t i = 0; i < dim; ++i) stats.counts[i] += b.counts[i];
    for (std::size_t k = 0; k < sum.size(); ++k) {
      sum[k] += b.sum[k];
      sum_sq[k] += b.sum_sq[k];
    }
  }
  const double n = static_cast<double>(stats.converged);
  stats.frequencies.assign(dim, 0.0);
  if (stats.converged > 0) {
    for (std::size_t i = 0; i < dim; ++i) stats.frequencies[i] = stats.counts[i] / n;
    stats.mean_steps = static_cast<double>(step_sum) / n;
  }
  for (std::size_t c = 0; c < n_check; ++c) {
    CheckpointStats cs{p.checkpoints[c], std::vector<double>(dim), std::vector<double>(dim)};
    for (std::size_t i = 0; i < dim; ++i) {
      const double mean = n > 0 ? sum[c * dim + i] / n : 0.0;
      const double var = n > 1 ? std::max(0.0, (sum_sq[c * dim + i] - n * mean * mean) / (n - 1)) : 0.0;
      cs.mean_weight[i] = mean;
      cs.sem[i] = n > 0 ? std::sqrt(var / n) : 0.0;
    }
    stats.martingale.push_back(std::move(cs));
  }
  return stats;
}

std::string_view to_string(NoiseVerdict v) noexcept {
  switch (v) {
    case NoiseVerdict::Ok: return "ok";
    case NoiseVerdict::NonPhysical: return "nonphysical";
    case NoiseVerdict::Diverged: return "diverged";
  }
  return "unknown";
}

namespace {

struct Classification {
  NoiseVerdict verdict = NoiseVerdict::Ok;
  std::uint64_t step = 0;
  bool converged = false;
};

// Steps the whole sequence from `start` (state before 1-based step first_step).
Classification classify(std::vector<Complex> c, const SseParams& p, const NoiseSequence& noise,
                        std::uint64_t first_step, bool converged_before,
                        std::optional<std::pair<std::uint64_t, double>> scaled = std::nullopt) {
  Classification out{NoiseVerdict::Ok, 0, converged_before};
  for (std::uint64_t step = first_step; step <= noise.increments.size(); ++step) {
    double dW = noise.increments[step - 1];
    if (scaled && scaled->first == step) dW *= scaled->second;
    const StepStatus s = step_in_place(c, p, dW);
    if (s != StepStatus::Ok) {
      out.verdict = s == StepStatus::Diverged ? NoiseVerdict::Diverged : NoiseVerdict::NonPhysical;
      out.step = step;
      return out;
    }
    std::size_t idx = 0;
    if (max_weight(c, &idx) >= 1.0 - p.eps_conv) out.converged = true;
  }
  return out;
}

}  // namespace

NoiseDiagnosis detect_nonphysical(const NoiseSequence& noise, const SseState& initial,
                                  const SseParams& p, bool search) {
  check_initial(initial, p);
  const auto base = classify(initial.amplitudes, p, noise, 1, false);
  NoiseDiagnosis diag{base.verdict, base.step, base.converged, std::nullopt};
  if (!search || base.verdict != NoiseVerdict::Ok || noise.increments.empty()) return diag;

  // prefix[k] is the state before 1-based step k + 1.
  const std::size_t len = noise.increments.size();
  std::vector<std::vector<Complex>> prefix;
  std::vector<bool> converged_prefix;
  prefix.reserve(len);
  std::vector<Complex> c = initial.amplitudes;
  bool conv = false;
  for (std::size_t k = 0; k < len; ++k) {
    prefix.push_back(c);
    converged_prefix.push_back(conv);
    step_in_place(c, p, noise.increments[k]);
    std::size_t idx = 0;
    if (max_weight(c, &idx) >= 1.0 - p.eps_conv) conv = true;
  }

  const std::size_t stride = std::max<std::size_t>(1, len / 200);
  for (double factor : kPerturbationFactors) {
    for (std::size_t k = 0; k < len; k += stride) {
      const auto r = classify(prefix[k], p, noise, k + 1, converged_prefix[k],
                              std::pair{static_cast<std::uint64_t>(k + 1), factor});
      if (r.verdict != NoiseVerdict::Ok) {
        diag.perturbation = NoisePerturbation{k + 1, factor, r.verdict};
        return diag;
      }
    }
  }
  return diag;
}

NoiseSequence perturb(const NoiseSequence& noise, std::uint64_t step, double factor) {
  if (step == 0 || step > noise.increments.size()) {
    throw Error(ErrorCode::InvalidArgument, "perturbation step out of range");
  }
  NoiseSequence out = noise;
  out.increments[step - 1] *= factor;
  return out;
}

void write_noise_csv(const NoiseSequence& noise, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  os << "# qcollapse noise sequence v1\n# dt=" << format17(noise.dt) << "\nstep,dW\n";
  for (std::size_t i = 0; i < noise.increments.size(); ++i) {
    os << (i + 1) << ',' << format17(noise.increments[i]) << '\n';
  }
  if (!os) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

NoiseSequence read_noise_csv(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::Io, "cannot open " + path.string());
  NoiseSequence noise;
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.starts_with("# dt=")) {
      noise.dt = parse_double(std::string_view(line).substr(5), path);
      continue;
    }
    if (line.starts_with('#')) continue;
    if (!header) {
      if (line != "step,dW") throw Error(ErrorCode::Format, path.string() + ": missing header");
      header = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::Format, path.string() + ": bad row");
    noise.increments.push_back(parse_double(std::string_view(line).substr(comma + 1), path));
  }
  return noise;
}

void write_noise_binary(const NoiseSequence& noise, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  os.write(kBinaryMagic, sizeof kBinaryMagic);
  put_u64(os, std::bit_cast<std::uint64_t>(noise.dt));
  put_u64(os, noise.increments.size());
  for (double x : noise.increments) put_u64(os, std::bit_cast<std::uint64_t>(x));
  if (!os) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

NoiseSequence read_noise_binary(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::Io, "cannot open " + path.string());
  char magic[8];
  if (!is.read(magic, 8) || !std::equal(magic, magic + 8, kBinaryMagic)) {
    throw Error(ErrorCode::Format, path.string() + ": not a noise sequence file");
  }
  NoiseSequence noise;
  noise.dt = std::bit_cast<double>(get_u64(is, path));
  const std::uint64_t n = get_u64(is, path);
  noise.increments.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    noise.increments.push_back(std::bit_cast<double>(get_u64(is, path)));
  }
  return noise;
}

SseState state_from_weights(const std::vector<double>& weights) {
  SseState s;
  for (double w : weights) {
    if (w < 0.0) throw Error(ErrorCode::BadWeights, "negative weight");
    s.amplitudes.emplace_back(std::sqrt(w), 0.0);
  }
  return s;
}

}  // namespace qcollapse
