#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>

#include "json.hpp"

#include "kappaot/suites.hpp"

namespace kappaot {

namespace {

std::string g17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

// Finite numbers as JSON numbers; inf and nan as strings, which JSON lacks.
nlohmann::ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  return g17(v);
}

void emit_csv(const VerificationReport& r, std::ostream& out) {
  out << "suite,case_id,model,params,lhs,rhs,margin,tol,pass\n";
  for (const auto& c : r.cases) {
    out << csv_field(c.suite) << ',' << csv_field(c.case_id) << ',' << csv_field(c.model) << ','
        << csv_field(c.params) << ',' << g17(c.lhs) << ',' << g17(c.rhs) << ',' << g17(c.margin) << ','
        << g17(c.tol) << ',' << (c.pass ? "true" : "false") << '\n';
  }
}

void emit_json(const VerificationReport& r, std::ostream& out) {
  nlohmann::ordered_json j;
  j["tool_version"] = r.tool_version;
  j["config"] = r.config_json.empty() ? nlohmann::ordered_json::object() : nlohmann::ordered_json::parse(r.config_json);
  j["partial"] = !r.errors.empty();

  auto cases = nlohmann::ordered_json::array();
  struct Tally {
    std::size_t total = 0, passed = 0;
    double worst = kInf;
    std::string worst_case;
  };
  std::map<std::string, Tally> per_suite;
  std::size_t passed = 0;
  for (const auto& c : r.cases) {
    nlohmann::ordered_json e;
    e["suite"] = c.suite;
    e["case_id"] = c.case_id;
    e["model"] = c.model;
    e["params"] = c.params;
    e["lhs"] = number(c.lhs);
    e["rhs"] = number(c.rhs);
    e["margin"] = number(c.margin);
    e["tol"] = number(c.tol);
    e["pass"] = c.pass;
    e["seed"] = c.seed;
    e["note"] = c.note;
    e["runtime"] = c.runtime;
    cases.push_back(std::move(e));

    Tally& t = per_suite[c.suite];
    ++t.total;
    if (c.pass) ++t.passed, ++passed;
    if (c.margin < t.worst || t.worst_case.empty()) t.worst = c.margin, t.worst_case = c.case_id;
  }
  j["cases"] = std::move(cases);
  j["skipped"] = r.skipped;
  j["errors"] = r.errors;

  nlohmann::ordered_json summary;
  summary["cases"] = r.cases.size();
  summary["passed"] = passed;
  summary["failed"] = r.cases.size() - passed;
  summary["skipped"] = r.skipped.size();
  summary["errors"] = r.errors.size();
  summary["all_pass"] = r.all_pass();
  nlohmann::ordered_json suites = nlohmann::ordered_json::object();
  for (const auto& [name, t] : per_suite) {
    suites[name] = {{"cases", t.total},
                    {"passed", t.passed},
                    {"worst_margin", number(t.worst)},
                    {"worst_case", t.worst_case}};
  }
  summary["suites"] = std::move(suites);
  j["summary"] = std::move(summary);
  out << j.dump(2) << '\n';
}

}  // namespace

void emit_table(const VerificationReport& report, const std::string& format, std::ostream& out) {
  if (format == "csv")
    emit_csv(report, out);
  else if (format == "json")
    emit_json(report, out);
  else
    throw ConfigError("unknown format '" + format + "' (json or csv)");
  if (!out) throw Error("emit_table: write failed");
}

void emit_table(const VerificationReport& report, const std::string& format, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("emit_table: cannot open '" + path + "' for writing");
  emit_table(report, format, f);
}

}  // namespace kappaot
