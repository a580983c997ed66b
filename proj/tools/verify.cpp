// Command-line front end for the verification suites.
//
// Exit status: 0 every case passes, 1 some case fails, 2 bad configuration,
// 3 runtime failure (the partial report is still written).

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "kappaot/suites.hpp"

namespace {

int env_jobs() {
  const char* v = std::getenv("CT_JOBS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  return (end && *end == '\0' && n > 0) ? static_cast<int>(n) : 1;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace kappaot;

  CLI::App app{"Numerical checks of transport-entropy inequalities for kappa-concave measures"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_config("--config", "", "Key-value run manifest (flags win on conflict)");
  app.set_version_flag("--version", std::string(KAPPAOT_VERSION));

  SuiteConfig cfg;
  std::string out_path;
  std::string format = "json";
  std::uint64_t seed = 0;
  double tol = 0.0;
  double h = 0.0;
  cfg.jobs = env_jobs();

  std::vector<std::string> suites = suite_ids();
  suites.push_back("all");
  app.add_option("--suite", cfg.suite, "Suite id")->check(CLI::IsMember(suites))->capture_default_str();
  app.add_option("--model", cfg.models, "Model id, e.g. cauchy:beta=2,n=1 (repeatable)")->delimiter(';');
  app.add_option("--grid", cfg.grid, "Cells of the one-dimensional grids")->capture_default_str();
  app.add_option("--eps", cfg.eps, "Perturbation sizes (repeatable)");
  app.add_option("--pert", cfg.perts, "Perturbation kinds: bump, odd, even, ratio, zero");
  auto* seed_opt = app.add_option("--seed", seed, "Master seed");
  auto* tol_opt = app.add_option("--tol", tol, "Tolerance override for every case");
  app.add_option("--c-kappa", cfg.c_kappa, "Cheeger constant for the Cauchy chain (<= 0: family minimum)");
  auto* h_opt = app.add_option("--h", h, "Poincare constant to validate and use instead of the built-in estimate");
  app.add_option("--out", out_path, "Report path (default: stdout)");
  app.add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  app.add_option("--jobs", cfg.jobs, "Worker threads (default: $CT_JOBS or 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (seed_opt->count()) cfg.seed = seed;
  if (tol_opt->count()) cfg.tol = tol;
  if (h_opt->count()) cfg.h = h;

  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    std::cerr << "verify: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  VerificationReport report;
  int status = 0;
  try {
    report = run(cfg);
    if (!report.errors.empty()) {
      for (const auto& e : report.errors) std::cerr << "verify: runtime failure: " << e << '\n';
      status = 3;
    } else {
      status = report.all_pass() ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << "verify: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "verify: runtime failure: " << e.what() << '\n';
    report.tool_version = KAPPAOT_VERSION;
    report.config_json = cfg.to_json();
    report.errors.push_back(e.what());
    status = 3;
  }

  try {
    if (out_path.empty())
      emit_table(report, format, std::cout);
    else
      emit_table(report, format, out_path);
  } catch (const std::exception& e) {
    std::cerr << "verify: " << e.what() << '\n';
    return 3;
  }

  std::size_t failed = 0;
  for (const auto& c : report.cases) {
    if (c.pass) continue;
    ++failed;
    std::cerr << "FAIL " << c.suite << ' ' << c.case_id << " model=" << c.model << " params=" << c.params
              << " margin=" << c.margin << " tol=" << c.tol << " seed=" << c.seed << '\n';
  }
  std::cerr << "verify: " << report.cases.size() << " cases, " << failed << " failed, " << report.skipped.size()
            << " skipped\n";
  return status;
}
