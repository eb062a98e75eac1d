#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "qcollapse/measurement.hpp"

namespace qcollapse::harness {

inline constexpr int kSchemaVersion = 1;

struct ScenarioSpec {
  std::string name;
  std::map<std::string, double> parameters;
  std::uint64_t seed = 20240101;
};

struct ScenarioInfo {
  std::string name;
  std::string summary;
  std::map<std::string, double> defaults;
  std::map<std::string, std::string> parameter_help;
};

const std::vector<ScenarioInfo>& scenarios();
const ScenarioInfo& scenario_info(const std::string& name);

/// Defaults merged with `overrides`. Throws UnknownScenario / UnknownParameter.
ScenarioSpec build(const std::string& name, const std::map<std::string, double>& overrides = {},
                   std::uint64_t seed = 20240101);

/// Reads {"name": ..., "parameters": {...}, "seed": N}; missing fields take defaults.
ScenarioSpec spec_from_json(const nlohmann::json& doc);
nlohmann::ordered_json spec_to_json(const ScenarioSpec& spec);

/// A built-in check with its tolerance. `Within`: |value - expected| <= tol.
/// `Below`: value < tol. `Above`: value > tol.
struct Expectation {
  enum class Kind { Within, Below, Above };

  std::string name;
  std::string policy;  // empty when policy-independent
  Kind kind = Kind::Within;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  std::string basis;
  bool pass = false;
};

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct RunReport {
  ScenarioSpec spec;
  std::vector<CollapsePolicy> policies;
  /// Policy-independent results.
  nlohmann::ordered_json common = nlohmann::ordered_json::object();
  /// Keyed by policy name ("collapse" / "unitary").
  std::map<std::string, nlohmann::ordered_json> per_policy;
  std::vector<Expectation> expectations;
  /// Keyed by CSV file stem.
  std::map<std::string, Table> tables;

  bool all_pass() const;
};

RunReport run(const ScenarioSpec& spec, const std::set<CollapsePolicy>& policies);

enum class Format { Json, Csv };

nlohmann::ordered_json to_json(const RunReport& report);
std::string to_json_string(const RunReport& report);

/// Json: writes `dir`/report.json. Csv: one `dir`/<table>.csv per table plus
/// expectations.csv. Returns the written paths.
std::vector<std::filesystem::path> emit(const RunReport& report, Format format,
                                        const std::filesystem::path& dir);

std::string format_number(double x);

}  // namespace qcollapse::harness
