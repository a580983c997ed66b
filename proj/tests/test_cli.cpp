#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"
#include "kappaot/suites.hpp"

using namespace kappaot;

namespace {

int exit_code(const std::string& args) {
  const std::string cmd = std::string(VERIFY_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string tmp_path(const std::string& name) {
  const char* dir = std::getenv("TMPDIR");
  return std::string(dir && *dir ? dir : "/tmp") + "/kappaot_" + name;
}

}  // namespace

TEST_CASE("csv layout") {
  VerificationReport empty;
  std::ostringstream a;
  emit_table(empty, "csv", a);
  CHECK(a.str() == "suite,case_id,model,params,lhs,rhs,margin,tol,pass\n");

  VerificationReport one;
  InequalityCase c;
  c.suite = "thm1";
  c.case_id = "cauchy:beta=2,n=1/bump/eps=0.1";
  c.model = "cauchy:beta=2,n=1";
  c.params = "grid=4096";
  c.lhs = 0.1;
  c.rhs = 1.0 / 3.0;
  settle(c);
  one.cases.push_back(c);
  std::ostringstream b;
  emit_table(one, "csv", b);
  std::istringstream in(b.str());
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  // quoted ids, then lhs and rhs round-trip through 17 digits
  CHECK(row.rfind("thm1,\"cauchy:beta=2,n=1/bump/eps=0.1\",\"cauchy:beta=2,n=1\",grid=4096,", 0) == 0);
  const std::string tail = row.substr(row.find("grid=4096,") + 10);
  double lhs = 0, rhs = 0;
  REQUIRE(std::sscanf(tail.c_str(), "%lf,%lf", &lhs, &rhs) == 2);
  CHECK(lhs == c.lhs);
  CHECK(rhs == c.rhs);
  CHECK_THROWS(emit_table(one, "xml", b));
  CHECK_THROWS_AS(emit_table(one, "csv", std::string("/nonexistent/dir/out.csv")), Error);
}

TEST_CASE("json keeps non-finite values") {
  VerificationReport r;
  InequalityCase c;
  c.suite = "bl";
  c.case_id = "x";
  c.lhs = kInf;
  c.rhs = 1.0;
  settle(c);
  r.cases.push_back(c);
  r.skipped.push_back("bl/y: skipped");
  std::ostringstream out;
  emit_table(r, "json", out);
  const auto j = nlohmann::json::parse(out.str());
  CHECK(j["cases"][0]["lhs"] == "inf");
  CHECK(j["cases"][0]["pass"] == true);
  CHECK(j["summary"]["cases"] == 1);
  CHECK(j["summary"]["skipped"] == 1);
  CHECK(j["partial"] == false);
}

TEST_CASE("config validation") {
  SuiteConfig ok;
  ok.suite = "bl";
  CHECK_NOTHROW(ok.validate());
  SuiteConfig bad = ok;
  bad.suite = "nope";
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = ok;
  bad.models = {"cauchy:beta=0.2,n=1"};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = ok;
  bad.perts = {"wiggle"};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad.suite = "lemmas";
  bad.perts.clear();
  CHECK(suite_needs_seed("lemmas"));
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad.seed = 1;
  CHECK_NOTHROW(bad.validate());
  CHECK(nlohmann::json::parse(bad.to_json())["suite"] == "lemmas");
}

TEST_CASE("seed derivation") {
  CHECK(derive_seed(42, "gkappa") == derive_seed(42, "gkappa"));
  CHECK(derive_seed(42, "gkappa") != derive_seed(43, "gkappa"));
  CHECK(derive_seed(42, "gkappa") != derive_seed(42, "lemma1"));
}

TEST_CASE("runs are reproducible") {
  SuiteConfig cfg;
  cfg.suite = "thm1";
  cfg.models = {"cauchy:beta=2,n=1"};
  cfg.eps = {0.1};
  cfg.seed = 7;
  const VerificationReport a = run(cfg);
  const VerificationReport b = run(cfg);
  REQUIRE(a.cases.size() == 1);
  REQUIRE(b.cases.size() == 1);
  CHECK(a.cases[0].margin == b.cases[0].margin);
  CHECK(a.cases[0].seed == b.cases[0].seed);
  CHECK(a.all_pass());

  cfg.jobs = 3;
  cfg.suite = "bl";
  cfg.models.clear();
  cfg.eps.clear();
  const VerificationReport p = run(cfg);
  cfg.jobs = 1;
  const VerificationReport s = run(cfg);
  REQUIRE(p.cases.size() == s.cases.size());
  for (std::size_t i = 0; i < p.cases.size(); ++i) {
    CHECK(p.cases[i].case_id == s.cases[i].case_id);
    CHECK(p.cases[i].margin == s.cases[i].margin);
  }
}

TEST_CASE("exit codes") {
  CHECK(exit_code("--suite nope") == 2);
  CHECK(exit_code("--suite lemmas") == 2);
  CHECK(exit_code("--suite bl --model cauchy:beta=0.5,n=1") == 2);
  CHECK(exit_code("--help") == 0);
  CHECK(exit_code("--suite bl") == 0);
  CHECK(exit_code("--suite bl --tol=-1") == 2);
  // a coarse grid leaves a residual that fails at zero tolerance
  CHECK(exit_code("--suite decomp --model ball:sigma=1,beta=2,n=1 --pert bump --grid 16 --tol 0") == 1);

  const std::string cfg = tmp_path("run.ini");
  const std::string out = tmp_path("run.csv");
  {
    std::ofstream f(cfg);
    // values with commas are quoted, otherwise they split into a list
    f << "suite = thm1\nmodel = \"cauchy:beta=2,n=1\"\neps = 0.1\nseed = 7\nformat = csv\n";
  }
  CHECK(exit_code("--config " + cfg + " --out " + out) == 0);
  std::ifstream in(out);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2);
  std::remove(cfg.c_str());
  std::remove(out.c_str());
}
