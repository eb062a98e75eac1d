#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "qcollapse/csl.hpp"
#include "qcollapse/detector_chain.hpp"
#include "qcollapse/error.hpp"
#include "qcollapse/frames.hpp"
#include "qcollapse/harness.hpp"
#include "qcollapse/optics.hpp"
#include "qcollapse/rdm.hpp"
#include "qcollapse/screen.hpp"

namespace qcollapse::harness {

namespace {

using json = nlohmann::ordered_json;
using std::numbers::pi;
constexpr Complex kI{0.0, 1.0};

double real_param(const ScenarioSpec& spec, const std::string& key) {
  auto it = spec.parameters.find(key);
  if (it == spec.parameters.end()) {
    throw Error(ErrorCode::UnknownParameter, "'" + key + "' missing from scenario '" + spec.name + "'");
  }
  return it->second;
}

std::uint64_t count_param(const ScenarioSpec& spec, const std::string& key) {
  const double v = real_param(spec, key);
  if (v < 0.0 || v != std::floor(v) || v > 1e15) {
    throw Error(ErrorCode::InvalidArgument, "parameter '" + key + "' must be a non-negative integer");
  }
  return static_cast<std::uint64_t>(v);
}

std::string policy_key(CollapsePolicy p) { return std::string(to_string(p)); }

// 4 binomial standard deviations of a frequency over n draws.
double four_sigma(double p, std::uint64_t n) {
  return 4.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

class Recorder {
 public:
  explicit Recorder(RunReport& r) : r_(r) {}

  void within(std::string name, std::string policy, double value, double expected, double tol,
              std::string basis) {
    add({std::move(name), std::move(policy), Expectation::Kind::Within, value, expected, tol,
         std::move(basis), std::abs(value - expected) <= tol});
  }
  void below(std::string name, std::string policy, double value, double bound, std::string basis) {
    add({std::move(name), std::move(policy), Expectation::Kind::Below, value, 0.0, bound,
         std::move(basis), value < bound});
  }
  void above(std::string name, std::string policy, double value, double bound, std::string basis) {
    add({std::move(name), std::move(policy), Expectation::Kind::Above, value, 0.0, bound,
         std::move(basis), value > bound});
  }

 private:
  void add(Expectation e) { r_.expectations.push_back(std::move(e)); }
  RunReport& r_;
};

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

json ket_json(const Ket& k) {
  json terms = json::array();
  for (const auto& [label, amp] : k.terms()) {
    terms.push_back({{"label", label.str()}, {"re", amp.real()}, {"im", amp.imag()}});
  }
  return terms;
}

json labels_json(const std::set<BasisLabel>& labels) {
  json out = json::array();
  for (const auto& l : labels) out.push_back(l.str());
  return out;
}

Table intensity_table(const IntensityMap& m) {
  Table t{{"x", "intensity"}, {}};
  for (std::size_t i = 0; i < m.values.size(); ++i) t.rows.push_back({m.positions[i], m.values[i]});
  return t;
}

Table hits_table(const IntensityMap& m, const std::vector<std::size_t>& hits) {
  Table t{{"bin", "x", "count"}, {}};
  for (std::size_t i = 0; i < hits.size(); ++i) {
    t.rows.push_back({static_cast<std::int64_t>(i), m.positions[i], static_cast<std::int64_t>(hits[i])});
  }
  return t;
}

json map_summary(const IntensityMap& m) {
  json j{{"mean", m.mean()}, {"min", m.min()}, {"max", m.max()}, {"visibility", nullptr}};
  if (m.max() > 0.0) j["visibility"] = visibility(m);
  return j;
}

ScreenGrid grid_from(const ScenarioSpec& spec) {
  const auto n = count_param(spec, "grid_points");
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "grid_points must be at least 2");
  return ScreenGrid{0.0, 1.0, static_cast<std::size_t>(n)};
}

// ---------------------------------------------------------------- hardy

void run_hardy(const ScenarioSpec& spec, const std::set<CollapsePolicy>& policies, RunReport& r) {
  using setups::kMinus;
  using setups::kPlus;
  Recorder rec(r);
  const auto trials = count_param(spec, "trials");
  if (trials == 0) throw Error(ErrorCode::InvalidArgument, "trials must be positive");

  const Ket k0 = setups::hardy_initial();
  const Ket k1 = setups::hardy_frame_partial(k0, setups::HardyFrame::Both);
  const std::array parts{setups::hardy_detectors(kPlus), setups::hardy_detectors(kMinus)};
  const auto probs = born_probabilities(k1, parts);

  const std::map<std::string, double> expected{
      {"c,c", 3.0 / 4.0}, {"c,d", 1.0 / 12.0}, {"d,c", 1.0 / 12.0}, {"d,d", 1.0 / 12.0}};
  Table prob_table{{"outcome", "amplitude_re", "amplitude_im", "probability", "expected"}, {}};
  json prob_json = json::object();
  for (const auto& [label, want] : expected) {
    const std::string plus_mode(1, label[0]);
    const std::string minus_mode(1, label[2]);
    const Complex amp = k1.amplitude(BasisLabel{{kPlus, plus_mode}, {kMinus, minus_mode}});
    const std::string name = plus_mode + "+" + minus_mode + "-";
    const double p = probs.at(label);
    prob_table.rows.push_back({name, amp.real(), amp.imag(), p, want});
    prob_json[name] = {{"amplitude", complex_json(amp)}, {"probability", p}};
    rec.within("P(" + name + ")", "", p, want, 1e-12, "joint detection table after both splitters");
  }
  r.tables["probabilities"] = std::move(prob_table);
  r.common["initial_state"] = ket_json(k0);
  r.common["final_state"] = ket_json(k1);
  r.common["probabilities"] = prob_json;

  // Conditional states seen by each frame ordering, conditioned on (d+, d-).
  const std::vector<MeasurementOrdering> orderings{
      setups::hardy_ordering(setups::HardyOrdering::Lab),
      setups::hardy_ordering(setups::HardyOrdering::FramePlus),
      setups::hardy_ordering(setups::HardyOrdering::FrameMinus)};
  const ConditionedOutcomes dd{{kPlus, "d"}, {kMinus, "d"}};
  json frames = json::object();
  for (const auto& o : orderings) {
    const auto ev = evolve_ordered(k0, o, dd);
    json snaps = json::array();
    for (const auto& s : ev.snapshots) {
      snaps.push_back({{"step", s.step}, {"probability", s.probability}, {"state", ket_json(s.state)}});
    }
    frames[o.name] = {{"path_probability", ev.probability}, {"snapshots", snaps}};
  }
  r.common["frames_dd"] = frames;

  const Ket plus_only = setups::hardy_frame_partial(k0, setups::HardyFrame::PlusOnly);
  const Ket minus_only = setups::hardy_frame_partial(k0, setups::HardyFrame::MinusOnly);
  const Ket cond_minus = conditional_state(plus_only, kPlus, parts[0], "d");
  const Ket cond_plus = conditional_state(minus_only, kMinus, parts[1], "d");
  const double p_u_minus = mode_marginals(cond_minus, kMinus)["u"];
  const double p_u_plus = mode_marginals(cond_plus, kPlus)["u"];
  r.common["plus_only_state"] = ket_json(plus_only);
  r.common["minus_only_state"] = ket_json(minus_only);
  r.common["conditional_minus_given_d_plus"] = ket_json(cond_minus);
  r.common["conditional_plus_given_d_minus"] = ket_json(cond_plus);
  rec.within("P(u- | d+) plus-only frame", "", p_u_minus, 1.0, 1e-10,
             "p+ detected at D+ before p- reaches its splitter");
  rec.within("P(u+ | d-) minus-only frame", "", p_u_plus, 1.0, 1e-10,
             "p- detected at D- before p+ reaches its splitter");

  const auto retro_json = [&](const RetrodictionReport& rep) {
    json forced = json::object();
    for (const auto& [name, labels] : rep.forced_support) forced[name] = labels_json(labels);
    return json{{"forced_support", forced},
                {"joint_required", labels_json(rep.joint_required)},
                {"missing_from_initial", labels_json(rep.missing_from_initial)},
                {"contradiction", rep.contradiction}};
  };
  const auto retro_dd = retrodiction_report(k0, orderings, dd);
  const auto retro_cc = retrodiction_report(k0, orderings, {{kPlus, "c"}, {kMinus, "c"}});
  const double uu = std::abs(k0.amplitude(BasisLabel{{kPlus, "u"}, {kMinus, "u"}}));
  r.common["retrodiction_dd"] = retro_json(retro_dd);
  r.common["retrodiction_cc"] = retro_json(retro_cc);
  rec.within("contradiction flag (d+,d-)", "", retro_dd.contradiction ? 1.0 : 0.0, 1.0, 0.0,
             "frames force u+ and u-; the joint label is absent initially");
  rec.within("|<u+u-|initial>|", "", uu, 0.0, 0.0, "initial state has no u+u- term");
  rec.within("contradiction flag (c+,c-)", "", retro_cc.contradiction ? 1.0 : 0.0, 0.0, 0.0,
             "c outcomes force nothing");

  // No-signaling: the p+ marginal does not depend on the ordering.
  const double lab = probs.at("d,c") + probs.at("d,d");
  const double fplus = born_probabilities(plus_only, parts[0]).at("d");
  double fminus = 0.0;
  for (const std::string x : {"c", "d"}) {
    fminus += evolve_ordered(k0, orderings[2], {{kMinus, x}, {kPlus, "d"}}).probability;
  }
  r.common["marginal_d_plus"] = {{"lab", lab}, {"frame-plus", fplus}, {"frame-minus", fminus}};
  rec.within("P(d+) lab", "", lab, 1.0 / 6.0, 1e-12, "marginal of the joint table");
  rec.within("P(d+) frame-plus", "", fplus, 1.0 / 6.0, 1e-12, "p+ measured first");
  rec.within("P(d+) frame-minus", "", fminus, 1.0 / 6.0, 1e-12, "p- measured first, summed over its outcomes");

  // Sequential detections per policy.
  Table freq{{"policy", "outcome", "count", "frequency", "born"}, {}};
  for (auto policy : policies) {
    const std::string pk = policy_key(policy);
    RngStream rng = RngStream(spec.seed, spec.name).split(pk);
    std::map<std::string, std::uint64_t> counts;
    for (const auto& [label, _] : expected) counts[label] = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
      const auto first = sample(k1, parts[0], policy, rng);
      const auto second = sample(first.post_state, parts[1], policy, rng);
      ++counts[first.label + "," + second.label];
    }
    json pj = json::object();
    json fj = json::object();
    for (const auto& [label, c] : counts) {
      const double f = static_cast<double>(c) / static_cast<double>(trials);
      const std::string name = std::string(1, label[0]) + "+" + std::string(1, label[2]) + "-";
      freq.rows.push_back({pk, name, static_cast<std::int64_t>(c), f, expected.at(label)});
      fj[name] = {{"count", c}, {"frequency", f},
                  {"sigma", std::sqrt(f * (1.0 - f) / static_cast<double>(trials))}};
    }
    pj["trials"] = trials;
    pj["frequencies"] = fj;
    const double f_dd = static_cast<double>(counts["d,d"]) / static_cast<double>(trials);
    if (policy == CollapsePolicy::Collapse) {
      rec.within("frequency(d+d-)", pk, f_dd, 1.0 / 12.0, four_sigma(1.0 / 12.0, trials),
                 "4 binomial sigma around the Born value");
    } else {
      // Without reduction the second detector samples its own marginal.
      const double product = (1.0 / 6.0) * (1.0 / 6.0);
      pj["product_of_marginals_dd"] = product;
      pj["deviation_from_born_dd"] = f_dd - 1.0 / 12.0;
      rec.within("frequency(d+d-)", pk, f_dd, product, four_sigma(product, trials),
                 "no reduction after the first click: marginals multiply");
    }
    r.per_policy[pk] = std::move(pj);
  }
  r.tables["frequencies"] = std::move(freq);
}

// ---------------------------------------------------------------- mz-histories

void run_mz(const ScenarioSpec& spec, const std::set<CollapsePolicy>& policies, RunReport& r) {
  Recorder rec(r);
  const double phi_c = real_param(spec, "phi_c");
  const double phi_d = real_param(spec, "phi_d");
  const double kappa = real_param(spec, "kappa");
  const auto hits = count_param(spec, "hits");
  const ScreenGrid grid = grid_from(spec);

  const auto stages = evolve(setups::mach_zehnder_input(), setups::mach_zehnder(phi_c, phi_d));
  const Ket& final_state = stages.back();
  const double alpha = 0.5 * (phi_c + phi_d);
  const double beta = 0.5 * (phi_d - phi_c);
  const Complex pre = kI * std::exp(kI * alpha);
  Ket closed;
  closed.accumulate(BasisLabel{{setups::kPhoton, "e"}}, pre * std::sin(beta));
  closed.accumulate(BasisLabel{{setups::kPhoton, "f"}}, pre * std::cos(beta));

  json stage_json = json::array();
  for (const auto& s : stages) stage_json.push_back(ket_json(s));
  r.common["stages"] = stage_json;
  r.common["alpha"] = alpha;
  r.common["beta"] = beta;
  rec.within("|final - closed form|", "", final_state.plus(closed.scaled(-1.0)).norm(), 0.0, 1e-12,
             "i e^{i alpha}(sin beta |e> + cos beta |f>)");

  const auto probs = born_probabilities(final_state,
                                        ObservablePartition::per_mode(setups::kPhoton, {"e", "f"}));
  const double pe = probs.at("e");
  const double pf = probs.at("f");
  r.common["history_weights"] = {{"e", pe}, {"f", pf}};
  rec.within("P(e)", "", pe, std::sin(beta) * std::sin(beta), 1e-12, "sin^2 beta");

  const std::map<std::string, double> kappas{{"e", kappa}, {"f", -kappa}};
  const IntensityMap coherent =
      intensity_pattern(components_from_ket(final_state, setups::kPhoton, kappas), grid);
  const IntensityMap mixture = mixture_intensity(
      {{pe, {PlaneWaveComponent{1.0, kappa, 0.0}}}, {pf, {PlaneWaveComponent{1.0, -kappa, 0.0}}}},
      grid);

  for (auto policy : policies) {
    const std::string pk = policy_key(policy);
    RngStream rng = RngStream(spec.seed, spec.name).split(pk);
    const bool collapse = policy == CollapsePolicy::Collapse;
    const IntensityMap& m = collapse ? mixture : coherent;
    const double vis = visibility(m);
    json pj = map_summary(m);
    pj["plate_state"] = collapse ? "mixture of definite final histories" : "coherent superposition";
    const auto counts = sample_hits(m, hits, rng);
    pj["hits"] = hits;
    r.tables["intensity_" + pk] = intensity_table(m);
    r.tables["hits_" + pk] = hits_table(m, counts);
    if (collapse) {
      rec.below("visibility", pk, vis, 1e-10, "incoherent sum of single-beam spots");
    } else {
      rec.within("visibility", pk, vis, std::abs(std::sin(2.0 * beta)), 1e-10,
                 "|sin 2 beta| for two crossing beams");
    }
    r.per_policy[pk] = std::move(pj);
  }
}

// ---------------------------------------------------------------- which-way

void run_which_way(const ScenarioSpec& spec, const std::set<CollapsePolicy>& policies,
                   RunReport& r) {
  Recorder rec(r);
  const double phi = real_param(spec, "phi");
  const auto n_initial = count_param(spec, "n_initial");
  const double growth = real_param(spec, "growth");
  const auto steps = count_param(spec, "steps");
  const auto arrival = count_param(spec, "b_arrival_step");
  const auto k_initial = count_param(spec, "k_initial");
  const auto n_macro = count_param(spec, "n_macro");
  const auto trials = count_param(spec, "trials");
  if (trials == 0) throw Error(ErrorCode::InvalidArgument, "trials must be positive");

  const Ket photon = evolve(setups::which_way_input(), setups::which_way(phi)).back();
  Ket closed;
  closed.accumulate(BasisLabel{{setups::kPhoton, "a"}}, -std::exp(kI * phi) / std::sqrt(2.0));
  closed.accumulate(BasisLabel{{setups::kPhoton, "b"}}, -kI / std::sqrt(2.0));
  r.common["photon_state"] = ket_json(photon);
  rec.within("|photon - closed form|", "", photon.plus(closed.scaled(-1.0)).norm(), 0.0, 1e-12,
             "-(e^{i phi}|a> + i|b>)/sqrt2");

  const ChainState seeded = seed(photon, n_initial);
  const ChainState amplified = amplify(seeded, {steps, growth, arrival, k_initial});

  Table branches{{"label", "role", "amplitude_re", "amplitude_im", "weight", "N", "K"}, {}};
  json bj = json::array();
  double max_product = 0.0;
  double min_own = std::numeric_limits<double>::infinity();
  for (const auto& b : amplified.branches()) {
    const std::string role = b.role == PacketRole::First ? "first" : "second";
    branches.rows.push_back({b.label, role, b.amplitude.real(), b.amplitude.imag(),
                             std::norm(b.amplitude), static_cast<std::int64_t>(b.perturbed_a),
                             static_cast<std::int64_t>(b.perturbed_b)});
    json history = json::array();
    for (auto h : b.history) history.push_back(h);
    bj.push_back({{"label", b.label}, {"role", role}, {"amplitude", complex_json(b.amplitude)},
                  {"N", b.perturbed_a}, {"K", b.perturbed_b}, {"history", history}});
    max_product = std::max(max_product, static_cast<double>(b.perturbed_a) *
                                            static_cast<double>(b.perturbed_b));
    min_own = std::min(min_own, static_cast<double>(b.own_count()));
  }
  r.tables["branches"] = std::move(branches);
  r.common["branches"] = bj;
  r.common["steps"] = amplified.steps_elapsed();
  const Complex cross = cross_branch_amplitude(amplified);
  r.common["cross_branch_amplitude"] = complex_json(cross);
  rec.within("max N*K over branches", "", max_product, 0.0, 0.0,
             "each packet perturbs only its own particle set");
  rec.within("|cross-branch amplitude|", "", std::abs(cross), 0.0, 0.0,
             "no configuration with both N > 0 and K > 0");
  rec.above("min own perturbed count", "", min_own, static_cast<double>(n_macro) - 0.5,
            "both branches reach the macroscopic threshold");

  const double weight_a = std::norm(photon.amplitude(BasisLabel{{setups::kPhoton, "a"}}));
  Table selection{{"policy", "label", "count", "frequency"}, {}};
  for (auto policy : policies) {
    const std::string pk = policy_key(policy);
    json pj = json::object();
    if (policy == CollapsePolicy::Collapse) {
      const RngStream base = RngStream(spec.seed, spec.name).split(pk);
      std::map<std::string, std::uint64_t> counts;
      for (const auto& b : amplified.branches()) counts[b.label] = 0;
      std::uint64_t loser_clean = 0;
      std::uint64_t steps_to_threshold = 0;
      RngStream rng = base;
      for (std::uint64_t t = 0; t < trials; ++t) {
        const auto rep = threshold_collapse(amplified, n_macro, rng);
        ++counts[rep.selected_branch];
        if (rep.losing_count == 0) ++loser_clean;
        steps_to_threshold = rep.steps_to_threshold;
      }
      json cj = json::object();
      for (const auto& [label, c] : counts) {
        const double f = static_cast<double>(c) / static_cast<double>(trials);
        selection.rows.push_back({pk, label, static_cast<std::int64_t>(c), f});
        cj[label] = {{"count", c}, {"frequency", f}};
      }
      const double fa = static_cast<double>(counts["a"]) / static_cast<double>(trials);
      const double clean = static_cast<double>(loser_clean) / static_cast<double>(trials);
      pj["trials"] = trials;
      pj["selection"] = cj;
      pj["steps_to_threshold"] = steps_to_threshold;
      pj["losing_branch_zero_fraction"] = clean;
      rec.within("selection frequency(a)", pk, fa, weight_a, 0.02, "Born weight of packet a");
      rec.within("runs with losing count 0", pk, clean, 1.0, 0.0,
                 "the losing branch is removed with its perturbed set");
    } else {
      pj["surviving_branches"] = amplified.branches().size();
      pj["note"] = "both macroscopic branches persist; no single outcome is produced";
      rec.within("surviving branches", pk, static_cast<double>(amplified.branches().size()), 2.0,
                 0.0, "unitary evolution keeps both amplified branches");
    }
    r.per_policy[pk] = std::move(pj);
  }
  if (!selection.rows.empty()) r.tables["selection"] = std::move(selection);
}

// ---------------------------------------------------------------- triple-interference

void run_triple(const ScenarioSpec& spec, const std::set<CollapsePolicy>& policies, RunReport& r) {
  Recorder rec(r);
  const double theta1 = real_param(spec, "theta1");
  const double theta3 = real_param(spec, "theta3");
  const double kappa = real_param(spec, "kappa");
  const auto trials = count_param(spec, "trials");
  if (trials == 0) throw Error(ErrorCode::InvalidArgument, "trials must be positive");
  const ScreenGrid grid = grid_from(spec);
  const std::string& ph = setups::kPhoton;

  const Ket state = evolve(setups::triple_split_input(), setups::triple_split(theta1, theta3)).back();
  const double s3 = std::sqrt(3.0);
  Ket closed;
  closed.accumulate(BasisLabel{{ph, "a"}}, -std::exp(kI * theta1) / s3);
  closed.accumulate(BasisLabel{{ph, "b"}}, -1.0 / s3);
  closed.accumulate(BasisLabel{{ph, "c"}}, -std::exp(kI * theta3) / s3);
  r.common["photon_state"] = ket_json(state);
  rec.within("|state - closed form|", "", state.plus(closed.scaled(-1.0)).norm(), 0.0, 1e-12,
             "-(e^{i theta1}|a> + |b> + e^{i theta3}|c>)/sqrt3");

  const ObservablePartition detector{ph, {{"click", {"b"}}, {"no-click", {"a", "c"}}}};
  const double p_click = born_probabilities(state, detector).at("click");
  rec.within("P(click)", "", p_click, 1.0 / 3.0, 1e-12, "|b|^2");

  const std::map<std::string, double> kappas{{"a", -kappa}, {"b", 0.0}, {"c", kappa}};
  const IntensityMap three = intensity_pattern(components_from_ket(state, ph, kappas), grid);
  const IntensityMap noclick =
      intensity_pattern(components_from_ket(project(state, detector, "no-click"), ph, kappas), grid);
  IntensityMap click = noclick;
  std::fill(click.values.begin(), click.values.end(), 0.0);

  const double background = three.mean() - noclick.mean();
  double max_diff = 0.0;
  for (std::size_t i = 0; i < three.values.size(); ++i) {
    max_diff = std::max(max_diff, std::abs(three.values[i] - noclick.values[i]));
  }
  r.common["three_beam"] = map_summary(three);
  r.common["two_beam_noclick"] = map_summary(noclick);
  r.common["discrepancy"] = {{"mean_difference", background}, {"max_pointwise_difference", max_diff}};

  for (auto policy : policies) {
    const std::string pk = policy_key(policy);
    RngStream rng = RngStream(spec.seed, spec.name).split(pk);
    json pj = json::object();
    pj["trials"] = trials;
    if (policy == CollapsePolicy::Collapse) {
      std::uint64_t clicks = 0;
      for (std::uint64_t t = 0; t < trials; ++t) {
        if (sample(state, detector, policy, rng).label == "click") ++clicks;
      }
      const double f = static_cast<double>(clicks) / static_cast<double>(trials);
      const auto hit_counts = sample_hits(noclick, trials - clicks, rng);
      pj["clicks"] = clicks;
      pj["click_frequency"] = f;
      pj["click_plate"] = map_summary(click);
      pj["noclick_plate"] = map_summary(noclick);
      pj["plate_hits"] = trials - clicks;
      r.tables["intensity_collapse_noclick"] = intensity_table(noclick);
      r.tables["intensity_collapse_click"] = intensity_table(click);
      r.tables["hits_collapse"] = hits_table(noclick, hit_counts);
      rec.within("click frequency", pk, f, 1.0 / 3.0, four_sigma(1.0 / 3.0, trials),
                 "4 binomial sigma around |b|^2");
      rec.within("click-trial plate max", pk, click.max(), 0.0, 0.0,
                 "detector absorbs b; a and c are gone");
      rec.within("no-click plate mean", pk, noclick.mean(), 2.0 / 3.0, 1e-10, "|a|^2 + |c|^2");
      rec.within("three-beam mean minus no-click mean", pk, background, 1.0 / 3.0, 1e-10,
                 "|b|^2 background removed by the reduction");
    } else {
      const auto hit_counts = sample_hits(three, trials, rng);
      pj["plate"] = map_summary(three);
      pj["plate_hits"] = trials;
      pj["mean_excess_over_collapse"] = background;
      r.tables["intensity_unitary"] = intensity_table(three);
      r.tables["hits_unitary"] = hits_table(three, hit_counts);
      rec.within("plate mean", pk, three.mean(), 1.0, 1e-10, "three beams of weight 1/3");
    }
    r.per_policy[pk] = std::move(pj);
  }
}

// ---------------------------------------------------------------- rdm-delay

void run_rdm(const ScenarioSpec& spec, const std::set<CollapsePolicy>& policies, RunReport& r) {
  Recorder rec(r);
  RdmConfig cfg;
  cfg.rate = real_param(spec, "rate");
  cfg.tick = real_param(spec, "tick");
  const double delta = real_param(spec, "delta");
  const auto trials = count_param(spec, "trials");
  const auto points = count_param(spec, "grid_points");
  const double delta_max = real_param(spec, "delta_max");
  cfg.validate();
  if (points < 2) throw Error(ErrorCode::InvalidArgument, "grid_points must be at least 2");
  if (trials == 0) throw Error(ErrorCode::InvalidArgument, "trials must be positive");

  RngStream rng(spec.seed, spec.name);
  const auto closed = [&](double d) { return 0.5 * (1.0 - std::exp(-2.0 * cfg.rate * d)); };
  const auto sem = [&](double p) { return std::sqrt(p * (1.0 - p) / static_cast<double>(trials)); };

  const double m0 = mismatch_fraction(cfg, 0.0, trials, rng);
  rec.within("mismatch at zero delay", "", m0, 0.0, 0.0, "both particles read at one instant");
  const double m = mismatch_fraction(cfg, delta, trials, rng);
  rec.within("mismatch at delta", "", m, closed(delta), 4.0 * sem(closed(delta)),
             "(1 - e^{-2 r delta})/2, 4 binomial sigma");

  Table sweep{{"delta", "rate_delta", "mismatch", "sem", "closed_form"}, {}};
  std::vector<double> fractions;
  std::vector<double> errors;
  for (std::uint64_t j = 0; j < points; ++j) {
    const double d = delta_max * static_cast<double>(j) / static_cast<double>(points - 1);
    const double f = mismatch_fraction(cfg, d, trials, rng);
    fractions.push_back(f);
    errors.push_back(sem(f));
    sweep.rows.push_back({d, cfg.rate * d, f, sem(f), closed(d)});
  }
  std::int64_t violations = 0;
  for (std::size_t j = 0; j + 1 < fractions.size(); ++j) {
    const double band = 4.0 * std::hypot(errors[j], errors[j + 1]);
    if (fractions[j + 1] < fractions[j] - band) ++violations;
  }
  r.tables["mismatch"] = std::move(sweep);
  rec.within("monotonicity violations", "", static_cast<double>(violations), 0.0, 0.0,
             "nondecreasing within 4 combined sigma");

  // One long trajectory: the pair always switches together.
  RngStream traj_rng = rng.split("trajectory");
  const auto traj = run_entangled(cfg, traj_rng);
  std::int64_t split_moves = 0;
  for (std::size_t i = 1; i < traj.size(); ++i) {
    const auto a = traj.at(i - 1).positions;
    const auto b = traj.at(i).positions;
    if ((a.first != b.first) != (a.second != b.second)) ++split_moves;
  }
  const double observed_rate = static_cast<double>(traj.jumps()) / cfg.duration;
  r.common["mismatch_zero"] = m0;
  r.common["mismatch_delta"] = {{"delta", delta}, {"fraction", m}, {"sem", sem(m)},
                                {"closed_form", closed(delta)}};
  r.common["trajectory"] = {{"ticks", traj.size()}, {"jumps", traj.jumps()},
                            {"observed_rate", observed_rate}, {"split_moves", split_moves}};
  rec.within("ticks where only one particle moved", "", static_cast<double>(split_moves), 0.0, 0.0,
             "joint configurations switch as a whole");

  for (auto policy : policies) {
    r.per_policy[policy_key(policy)] = {{"policy_independent", true}};
  }
}

// ---------------------------------------------------------------- csl-ensemble

void run_csl(const ScenarioSpec& spec, const std::set<CollapsePolicy>& policies, RunReport& r) {
  Recorder rec(r);
  const double w0 = real_param(spec, "w0");
  if (!(w0 > 0.0 && w0 < 1.0)) throw Error(ErrorCode::InvalidArgument, "w0 must lie in (0, 1)");
  SseParams p;
  p.lambda = real_param(spec, "lambda");
  p.dt = real_param(spec, "dt");
  p.eps_conv = real_param(spec, "eps_conv");
  p.max_steps = count_param(spec, "max_steps");
  p.eigenvalues = {real_param(spec, "a0"), real_param(spec, "a1")};
  p.validate();
  const auto n_traj = count_param(spec, "trajectories");
  const double factor = real_param(spec, "perturbation_factor");
  const SseState init = state_from_weights({w0, 1.0 - w0});

  for (auto policy : policies) {
    const std::string pk = policy_key(policy);
    RngStream rng = RngStream(spec.seed, spec.name).split(pk);
    json pj = json::object();
    if (policy == CollapsePolicy::UnitaryOnly) {
      pj["weights"] = init.weights();
      pj["note"] = "no collapse term; the superposition persists";
      rec.within("max weight", pk, std::max(w0, 1.0 - w0), std::max(w0, 1.0 - w0), 0.0,
                 "weights are constant without the stochastic term");
      r.per_policy[pk] = std::move(pj);
      continue;
    }

    const auto stats = ensemble_stats(init, p, n_traj, rng);
    Table freq{{"eigenstate", "count", "frequency", "born"}, {}};
    const std::array<double, 2> born{w0, 1.0 - w0};
    for (std::size_t i = 0; i < 2; ++i) {
      freq.rows.push_back({static_cast<std::int64_t>(i), static_cast<std::int64_t>(stats.counts[i]),
                           stats.frequencies[i], born[i]});
      rec.within("frequency(" + std::to_string(i) + ")", pk, stats.frequencies[i], born[i],
                 four_sigma(born[i], stats.converged), "4 binomial sigma around the initial weight");
    }
    rec.within("converged trajectories", pk, static_cast<double>(stats.converged),
               static_cast<double>(stats.trajectories), 0.0, "every trajectory reaches eps_conv");
    rec.below("max norm error", pk, stats.max_norm_error, 1e-9, "renormalized every step");

    Table mart{{"step", "eigenstate", "mean_weight", "sem", "initial"}, {}};
    std::int64_t outside = 0;
    json mj = json::array();
    for (const auto& c : stats.martingale) {
      for (std::size_t i = 0; i < 2; ++i) {
        mart.rows.push_back({static_cast<std::int64_t>(c.step), static_cast<std::int64_t>(i),
                             c.mean_weight[i], c.sem[i], born[i]});
        if (std::abs(c.mean_weight[i] - born[i]) > 4.0 * c.sem[i] + 1e-12) ++outside;
      }
      mj.push_back({{"step", c.step}, {"mean_weight", c.mean_weight}, {"sem", c.sem}});
    }
    rec.within("martingale checkpoints outside 4 SEM", pk, static_cast<double>(outside), 0.0, 0.0,
               "ensemble mean of each weight is conserved");
    r.tables["csl_frequencies"] = std::move(freq);
    r.tables["martingale"] = std::move(mart);

    // Instability: a constructed increment, then a recorded sequence.
    const double dw_adv = adversarial_increment(init, p);
    const auto adv = detect_nonphysical(NoiseSequence{p.dt, {dw_adv}}, init, p, false);
    rec.within("adversarial increment failure step", pk,
               adv.verdict == NoiseVerdict::NonPhysical ? static_cast<double>(adv.step) : -1.0, 1.0,
               0.0, "increment past the bracket root of the most off-centre component");

    RngStream inst_rng = rng.split("instability");
    const auto recorded = run_trajectory(init, p, inst_rng);
    const auto diag = detect_nonphysical(recorded.noise, init, p, true);
    std::optional<NoisePerturbation> flipped;
    for (std::uint64_t k = 1; k <= recorded.noise.increments.size() && !flipped; ++k) {
      const auto d = detect_nonphysical(perturb(recorded.noise, k, factor), init, p, false);
      if (d.verdict != NoiseVerdict::Ok) flipped = NoisePerturbation{k, factor, d.verdict};
    }
    bool replay_match = false;
    if (flipped) {
      const auto again = detect_nonphysical(perturb(recorded.noise, flipped->step, factor), init, p, false);
      replay_match = again.verdict == flipped->verdict;
    }
    json inst = {{"adversarial_increment", dw_adv},
                 {"adversarial_verdict", to_string(adv.verdict)},
                 {"adversarial_step", adv.step},
                 {"recorded_steps", recorded.steps},
                 {"recorded_verdict", to_string(diag.verdict)}};
    if (diag.perturbation) {
      inst["smallest_destabilizing"] = {{"step", diag.perturbation->step},
                                        {"factor", diag.perturbation->factor},
                                        {"verdict", to_string(diag.perturbation->verdict)}};
    }
    if (flipped) {
      inst["scaled_increment"] = {{"step", flipped->step}, {"factor", factor},
                                  {"verdict", to_string(flipped->verdict)}};
    }
    rec.within("recorded sequence ok", pk, diag.verdict == NoiseVerdict::Ok ? 1.0 : 0.0, 1.0, 0.0,
               "an ordinary Gaussian sequence is physical");
    rec.within("single scaled increment destabilizes (replayed)", pk,
               flipped && replay_match ? 1.0 : 0.0, 1.0, 0.0,
               "one increment scaled by the perturbation factor");

    pj["trajectories"] = stats.trajectories;
    pj["converged"] = stats.converged;
    pj["nonphysical"] = stats.nonphysical;
    pj["max_steps_exceeded"] = stats.max_steps_exceeded;
    pj["counts"] = stats.counts;
    pj["frequencies"] = stats.frequencies;
    pj["mean_steps"] = stats.mean_steps;
    pj["max_norm_error"] = stats.max_norm_error;
    pj["martingale"] = mj;
    pj["instability"] = inst;
    r.per_policy[pk] = std::move(pj);
  }
}

}  // namespace

bool RunReport::all_pass() const {
  return std::all_of(expectations.begin(), expectations.end(),
                     [](const Expectation& e) { return e.pass; });
}

RunReport run(const ScenarioSpec& spec, const std::set<CollapsePolicy>& policies) {
  const auto& info = scenario_info(spec.name);
  for (const auto& [key, _] : spec.parameters) {
    if (!info.defaults.contains(key)) {
      throw Error(ErrorCode::UnknownParameter, "'" + key + "' for scenario '" + spec.name + "'");
    }
  }
  if (policies.empty()) throw Error(ErrorCode::InvalidArgument, "no collapse policy selected");

  RunReport report;
  report.spec = spec;
  report.policies.assign(policies.begin(), policies.end());
  try {
    if (spec.name == "hardy") run_hardy(spec, policies, report);
    else if (spec.name == "mz-histories") run_mz(spec, policies, report);
    else if (spec.name == "which-way") run_which_way(spec, policies, report);
    else if (spec.name == "triple-interference") run_triple(spec, policies, report);
    else if (spec.name == "rdm-delay") run_rdm(spec, policies, report);
    else run_csl(spec, policies, report);
  } catch (const Error& e) {
    throw Error(e.code(), "scenario '" + spec.name + "': " + e.detail());
  }
  return report;
}

}  // namespace qcollapse::harness
