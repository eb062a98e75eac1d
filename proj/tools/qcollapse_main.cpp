// qcollapse: list, describe and run the built-in scenarios.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qcollapse/error.hpp"
#include "qcollapse/harness.hpp"

namespace h = qcollapse::harness;

namespace {

std::pair<std::string, double> parse_assignment(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw qcollapse::Error(qcollapse::ErrorCode::InvalidArgument,
                           "--param expects key=value, got '" + kv + "'");
  }
  const std::string key = kv.substr(0, eq);
  const std::string text = kv.substr(eq + 1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw qcollapse::Error(qcollapse::ErrorCode::InvalidArgument,
                           "parameter '" + key + "' has non-numeric value '" + text + "'");
  }
  return {key, value};
}

std::set<qcollapse::CollapsePolicy> parse_policy(const std::string& s) {
  using qcollapse::CollapsePolicy;
  if (s == "collapse") return {CollapsePolicy::Collapse};
  if (s == "unitary") return {CollapsePolicy::UnitaryOnly};
  return {CollapsePolicy::Collapse, CollapsePolicy::UnitaryOnly};
}

void print_list() {
  for (const auto& s : h::scenarios()) std::cout << s.name << "  " << s.summary << "\n";
}

void print_describe(const std::string& name) {
  const auto& info = h::scenario_info(name);
  std::cout << info.name << "\n  " << info.summary << "\n\nparameters (default):\n";
  for (const auto& [key, value] : info.defaults) {
    std::cout << "  " << key << " = " << h::format_number(value);
    if (auto it = info.parameter_help.find(key); it != info.parameter_help.end()) {
      std::cout << "  " << it->second;
    }
    std::cout << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collapse-policy comparison runs for interferometer and collapse-model scenarios"};
  app.require_subcommand(1);

  app.add_subcommand("list", "List scenarios");

  auto* describe = app.add_subcommand("describe", "Show a scenario's parameters and defaults");
  std::string describe_name;
  describe->add_option("scenario", describe_name)->required();

  auto* run = app.add_subcommand("run", "Run a scenario and report its expectations");
  std::string run_name;
  std::vector<std::string> params;
  std::string policy = "both";
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string format = "json";
  std::string config;
  run->add_option("scenario", run_name, "Scenario name (optional with --config)");
  run->add_option("--param", params, "Parameter override key=value (repeatable)");
  run->add_option("--policy", policy)->check(CLI::IsMember({"collapse", "unitary", "both"}));
  auto* seed_opt = run->add_option("--seed", seed, "64-bit RNG seed");
  run->add_option("--out", out_dir, "Output directory; JSON goes to stdout when omitted");
  run->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));
  run->add_option("--config", config, "Scenario JSON document; flags override its values")
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("list")) {
      print_list();
      return 0;
    }
    if (app.got_subcommand("describe")) {
      print_describe(describe_name);
      return 0;
    }

    h::ScenarioSpec spec;
    if (!config.empty()) {
      std::ifstream is(config);
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(is);
      } catch (const nlohmann::json::exception& e) {
        throw qcollapse::Error(qcollapse::ErrorCode::Format, config + ": " + e.what());
      }
      if (!run_name.empty() && doc.is_object()) doc["name"] = run_name;
      spec = h::spec_from_json(doc);
    } else {
      if (run_name.empty()) {
        throw qcollapse::Error(qcollapse::ErrorCode::InvalidArgument,
                               "run needs a scenario name or --config");
      }
      spec = h::build(run_name);
    }
    std::map<std::string, double> merged = spec.parameters;
    for (const auto& kv : params) {
      const auto [key, value] = parse_assignment(kv);
      merged[key] = value;
    }
    spec = h::build(spec.name, merged, *seed_opt ? seed : spec.seed);

    const auto report = h::run(spec, parse_policy(policy));
    const auto fmt = format == "csv" ? h::Format::Csv : h::Format::Json;
    if (out_dir.empty()) {
      if (fmt == h::Format::Csv) {
        throw qcollapse::Error(qcollapse::ErrorCode::InvalidArgument, "--format csv needs --out");
      }
      std::cout << h::to_json_string(report);
    } else {
      for (const auto& p : h::emit(report, fmt, out_dir)) std::cerr << "wrote " << p.string() << "\n";
    }
    for (const auto& e : report.expectations) {
      if (!e.pass) {
        std::cerr << "FAIL " << e.name << (e.policy.empty() ? "" : " [" + e.policy + "]")
                  << ": value " << h::format_number(e.value) << "\n";
      }
    }
    return report.all_pass() ? 0 : 1;
  } catch (const qcollapse::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
