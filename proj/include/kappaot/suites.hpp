#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kappaot/inequalities.hpp"

namespace kappaot {

/// Suite ids accepted by run(); "all" expands to every other id.
const std::vector<std::string>& suite_ids();
/// Suites drawing random samples; they need an explicit seed.
bool suite_needs_seed(const std::string& id);

struct SuiteConfig {
  std::string suite = "all";
  std::vector<std::string> models;   // empty: the built-in battery of each suite
  std::size_t grid = 4096;
  std::vector<double> eps;           // empty: suite defaults
  std::vector<std::string> perts;    // empty: suite defaults
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;         // overrides every suite tolerance
  double c_kappa = 0.0;              // <= 0: family minimum from the Cheeger check
  std::optional<double> h;           // user-supplied Poincare constant
  int jobs = 1;

  /// Throws ConfigError on unknown suites, models or perturbations and on a
  /// missing seed.
  void validate() const;
  std::string to_json() const;
};

struct ConfigError : Error {
  using Error::Error;
};

struct VerificationReport {
  std::string tool_version;
  std::string config_json;
  std::vector<InequalityCase> cases;
  std::vector<std::string> skipped;  // reproducible description of what was not run
  std::vector<std::string> errors;   // runtime failures (the report is then partial)

  bool all_pass() const;
};

VerificationReport run(const SuiteConfig& config);

/// CSV: suite,case_id,model,params,lhs,rhs,margin,tol,pass (17 significant digits).
/// JSON: version, config, cases, summary (pass counts and worst margins per suite).
void emit_table(const VerificationReport& report, const std::string& format, std::ostream& out);
void emit_table(const VerificationReport& report, const std::string& format, const std::string& path);

/// 64-bit seed for a named sub-stream.
std::uint64_t derive_seed(std::uint64_t seed, const std::string& tag);

}  // namespace kappaot
