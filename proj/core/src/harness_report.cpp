#include <cmath>
#include <cstdio>
#include <fstream>

#include "qcollapse/error.hpp"
#include "qcollapse/harness.hpp"

namespace qcollapse::harness {

namespace {

using json = nlohmann::ordered_json;

std::string_view kind_name(Expectation::Kind k) {
  switch (k) {
    case Expectation::Kind::Within: return "within";
    case Expectation::Kind::Below: return "below";
    case Expectation::Kind::Above: return "above";
  }
  return "within";
}

// Non-finite doubles become null in JSON; keep them readable instead.
json number_json(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

json cell_json(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return number_json(*d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return *i;
  return std::get<std::string>(c);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string cell_csv(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return csv_escape(std::get<std::string>(c));
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  os << content;
  os.close();
  if (!os) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

std::string table_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out += ',';
    out += csv_escape(t.columns[i]);
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += cell_csv(row[i]);
    }
    out += '\n';
  }
  return out;
}

Table expectations_table(const RunReport& r) {
  Table t{{"name", "policy", "kind", "value", "expected", "tolerance", "pass", "basis"}, {}};
  for (const auto& e : r.expectations) {
    t.rows.push_back({e.name, e.policy, std::string(kind_name(e.kind)), e.value, e.expected,
                      e.tolerance, std::string(e.pass ? "true" : "false"), e.basis});
  }
  return t;
}

}  // namespace

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json to_json(const RunReport& report) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["scenario"] = spec_to_json(report.spec);
  json policies = json::array();
  for (auto p : report.policies) policies.push_back(std::string(to_string(p)));
  doc["policies"] = policies;
  doc["common"] = report.common;
  json results = json::object();
  for (const auto& [k, v] : report.per_policy) results[k] = v;
  doc["results"] = results;

  json exps = json::array();
  for (const auto& e : report.expectations) {
    json j;
    j["name"] = e.name;
    if (!e.policy.empty()) j["policy"] = e.policy;
    j["kind"] = kind_name(e.kind);
    j["value"] = number_json(e.value);
    if (e.kind == Expectation::Kind::Within) j["expected"] = e.expected;
    j["tolerance"] = e.tolerance;
    j["basis"] = e.basis;
    j["pass"] = e.pass;
    exps.push_back(std::move(j));
  }
  doc["expectations"] = exps;

  json tables = json::object();
  for (const auto& [name, t] : report.tables) {
    json rows = json::array();
    for (const auto& row : t.rows) {
      json r = json::array();
      for (const auto& c : row) r.push_back(cell_json(c));
      rows.push_back(std::move(r));
    }
    tables[name] = {{"columns", t.columns}, {"rows", rows}};
  }
  doc["tables"] = tables;
  doc["all_pass"] = report.all_pass();
  return doc;
}

std::string to_json_string(const RunReport& report) { return to_json(report).dump(2) + "\n"; }

std::vector<std::filesystem::path> emit(const RunReport& report, Format format,
                                        const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());

  std::vector<std::filesystem::path> written;
  if (format == Format::Json) {
    const auto path = dir / "report.json";
    write_file(path, to_json_string(report));
    written.push_back(path);
    return written;
  }
  for (const auto& [name, t] : report.tables) {
    const auto path = dir / (name + ".csv");
    write_file(path, table_csv(t));
    written.push_back(path);
  }
  const auto path = dir / "expectations.csv";
  write_file(path, table_csv(expectations_table(report)));
  written.push_back(path);
  return written;
}

}  // namespace qcollapse::harness
