#include "kappaot/suites.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

#include "json.hpp"

namespace kappaot {

namespace {

const std::vector<std::string> kSuites = {"lemmas", "thm1",     "decomp",    "thm2", "thm3",
                                          "linearize", "bl", "bl-quant", "poincare"};

const std::vector<std::string> kBattery1D = {"ball:sigma=1,beta=1,n=1", "ball:sigma=1,beta=2,n=1",
                                             "ball:sigma=1,beta=5,n=1", "cauchy:beta=2,n=1",
                                             "cauchy:beta=3,n=1",       "cauchy:beta=6,n=1"};
const std::vector<std::string> kBattery2D = {"ball:sigma=1,beta=2,n=2", "cauchy:beta=3,n=2",
                                             "cauchy:beta=4,n=2"};
const std::vector<std::string> kChainModels = {"cauchy:beta=2,n=1", "cauchy:beta=3,n=1", "cauchy:beta=4,n=2",
                                               "cauchy:beta=6,n=3"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Per-job output; merged in job order.
struct Sink {
  std::vector<InequalityCase> cases;
  std::vector<std::string> skipped;
  std::vector<std::string> errors;
};

struct Job {
  std::string suite;
  std::string label;
  std::function<void(Sink&)> body;
};

// Poincare constants shared between suites, computed once per model.
class PoincareCache {
 public:
  explicit PoincareCache(const SuiteConfig& cfg) : cfg_(cfg) {}

  const PoincareEstimate& get(const DensityModel& m) {
    std::shared_ptr<Entry> e;
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto& slot = entries_[m.id()];
      if (!slot) slot = std::make_shared<Entry>();
      e = slot;
    }
    std::call_once(e->once, [&] {
      try {
        e->value = compute(m);
      } catch (...) {
        e->error = std::current_exception();
      }
    });
    if (e->error) std::rethrow_exception(e->error);
    return e->value;
  }

 private:
  struct Entry {
    std::once_flag once;
    PoincareEstimate value;
    std::exception_ptr error;
  };

  PoincareEstimate compute(const DensityModel& m) const {
    const TestFamily family = standard_family(m.dim(), model_length(m));
    if (cfg_.h) {
      PoincareEstimate e = verify_weighted_poincare(quadrature_measure(m), *cfg_.h, family, CenterKind::Median,
                                                    PoincareMethod::UserSupplied);
      e.model_id = m.id();
      return e;
    }
    if (m.kp().regime() == Case::One) return search_poincare_constant(m, quadrature_measure(m), family);
    return cauchy_chain(m, cfg_.c_kappa).estimate;
  }

  const SuiteConfig& cfg_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<Entry>> entries_;
};

struct Context {
  const SuiteConfig& cfg;
  PoincareCache& cache;

  double tol(double fallback) const { return cfg.tol ? *cfg.tol : fallback; }
  std::uint64_t seed_for(const std::string& suite, const std::string& case_id) const {
    return cfg.seed ? derive_seed(*cfg.seed, suite + "/" + case_id) : 0;
  }
  std::vector<std::string> models_or(const std::vector<std::string>& battery) const {
    return cfg.models.empty() ? battery : cfg.models;
  }
  std::vector<double> eps_or(std::vector<double> fallback) const { return cfg.eps.empty() ? fallback : cfg.eps; }
  // An explicit model narrows the default sweep to its first perturbation.
  std::vector<std::string> perts_or(std::vector<std::string> fallback) const {
    if (!cfg.perts.empty()) return cfg.perts;
    if (!cfg.models.empty()) fallback.resize(1);
    return fallback;
  }
};

// Runs `make`, stamping suite, id, seed and runtime on every case it returns.
template <class F>
void timed(Sink& out, const Context& ctx, const std::string& suite, const std::string& case_id, F&& make) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<InequalityCase> made = make();
  const double dt = seconds_since(t0);
  for (auto& c : made) {
    c.suite = suite;
    c.case_id = c.case_id.empty() ? case_id : case_id + "/" + c.case_id;
    c.seed = ctx.seed_for(suite, c.case_id);
    c.runtime = dt;
    out.cases.push_back(std::move(c));
  }
}

InequalityCase record(const std::string& sub, const std::string& model, const std::string& params, double lhs,
                      double rhs, double tol, std::string note = {}) {
  InequalityCase c;
  c.case_id = sub;
  c.model = model;
  c.params = params;
  c.lhs = lhs;
  c.rhs = rhs;
  c.tol = tol;
  c.note = std::move(note);
  settle(c);
  return c;
}

// ---------------------------------------------------------------------------
// lemmas

std::vector<double> gkappa_betas(int n) {
  std::vector<double> b = {1.0, 2.0, 5.0, double(n), 2.0 * n};
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

void plan_lemmas(const Context& ctx, std::vector<Job>& jobs) {
  const std::size_t samples = 10000;
  const double tol = ctx.tol(1e-12);
  for (int n = 1; n <= 5; ++n) {
    for (double beta : gkappa_betas(n)) {
      for (int sign : {1, -1}) {
        // kappa = -1/beta needs beta >= n for G to stay nonnegative.
        if (sign < 0 && beta < n) continue;
        const double kappa = sign / beta;
        const std::string id = "gkappa/n=" + std::to_string(n) + "/kappa=" + (sign > 0 ? "+" : "-") + "1/" + num(beta);
        jobs.push_back({"lemmas", id, [=, &ctx](Sink& out) {
                          timed(out, ctx, "lemmas", id, [&] {
                            Rng rng(ctx.seed_for("lemmas", id));
                            const MatrixDomain dom = sign > 0 ? MatrixDomain::EigGtMinusOne : MatrixDomain::Nonnegative;
                            double worst = kInf;
                            std::size_t below = 0;
                            for (std::size_t k = 0; k < samples; ++k) {
                              const double g = G_kappa(random_symmetric(n, dom, rng), kappa);
                              worst = std::min(worst, g);
                              if (g < -tol) ++below;
                            }
                            return std::vector{record("", "matrix:n=" + std::to_string(n),
                                                      "kappa=" + num(kappa) + ";samples=" + std::to_string(samples),
                                                      worst, 0.0, tol, "failures=" + std::to_string(below))};
                          });
                        }});
      }
    }
  }

  auto worst_of = [](const std::vector<BoundResult>& rs) {
    return *std::min_element(rs.begin(), rs.end(),
                             [](const BoundResult& a, const BoundResult& b) { return a.margin < b.margin; });
  };
  for (int n = 1; n <= 5; ++n) {
    for (double beta : {1.0, 2.0, 10.0}) {
      const std::string id = "lemma1/n=" + std::to_string(n) + "/beta=" + num(beta);
      jobs.push_back({"lemmas", id, [=, &ctx](Sink& out) {
                        timed(out, ctx, "lemmas", id, [&] {
                          Rng rng(ctx.seed_for("lemmas", id));
                          std::vector<BoundResult> rs;
                          for (std::size_t k = 0; k < samples; ++k)
                            rs.push_back(lemma_case1_bound(random_symmetric(n, MatrixDomain::EigGtMinusOne, rng), beta));
                          const BoundResult w = worst_of(rs);
                          return std::vector{record("", "matrix:n=" + std::to_string(n),
                                                    "beta=" + num(beta) + ";c=0.3;samples=" + std::to_string(samples),
                                                    w.lhs, w.rhs, tol, "worst sample")};
                        });
                      }});
    }
    for (double mult : {1.0, 2.0, 10.0}) {
      const double beta = mult * n;
      const std::string id = "lemma2/n=" + std::to_string(n) + "/beta=" + num(beta);
      jobs.push_back({"lemmas", id, [=, &ctx](Sink& out) {
                        timed(out, ctx, "lemmas", id, [&] {
                          Rng rng(ctx.seed_for("lemmas", id));
                          std::vector<BoundResult> rs;
                          for (std::size_t k = 0; k < samples; ++k)
                            rs.push_back(lemma_case2_bound(random_symmetric(n, MatrixDomain::Nonnegative, rng), beta));
                          const BoundResult w = worst_of(rs);
                          return std::vector{record("", "matrix:n=" + std::to_string(n),
                                                    "beta=" + num(beta) + ";samples=" + std::to_string(samples), w.lhs,
                                                    w.rhs, tol, "worst sample")};
                        });
                      }});
    }
  }

  jobs.push_back({"lemmas", "scalar-log", [&ctx, tol](Sink& out) {
                    timed(out, ctx, "lemmas", "scalar-log", [&] {
                      // Geometric approach to -1 and 0 from both sides, then linear up to 1000.
                      double worst = kInf, at = 0.0;
                      auto probe = [&](double t) {
                        const double m = scalar_log_bound(t);
                        if (m < worst) worst = m, at = t;
                      };
                      for (int k = 0; k <= 2000; ++k) {
                        const double d = std::pow(10.0, -15.0 + 15.0 * k / 2000.0);
                        probe(-1.0 + d);
                        probe(-d);
                        probe(d);
                      }
                      for (int k = 0; k <= 1000000; ++k) probe(-1.0 + 1001.0 * k / 1000000.0);
                      return std::vector{record("", "scalar", "t in (-1,1000];c=0.3", worst, 0.0, tol,
                                                "worst t=" + num(at))};
                    });
                  }});

  jobs.push_back({"lemmas", "F-sandwich", [&ctx, tol](Sink& out) {
                    timed(out, ctx, "lemmas", "F-sandwich", [&] {
                      double lower = kInf, upper = kInf;
                      for (int k = 0; k <= 1000000; ++k) {
                        const double t = 100.0 * k / 1000000.0;
                        const double mn = std::min(t, t * t);
                        lower = std::min(lower, F(t) - 0.25 * mn);
                        upper = std::min(upper, mn - F(t));
                      }
                      return std::vector{record("lower", "scalar", "t in [0,100]", lower, 0.0, tol),
                                         record("upper", "scalar", "t in [0,100]", upper, 0.0, tol)};
                    });
                  }});

  jobs.push_back({"lemmas", "log-quadratic", [&ctx, tol](Sink& out) {
                    timed(out, ctx, "lemmas", "log-quadratic", [&] {
                      Rng rng(ctx.seed_for("lemmas", "log-quadratic"));
                      double worst = kInf;
                      for (int k = 0; k < 100000; ++k) {
                        const double s = 100.0 * rng.uniform_open();
                        const double t = 100.0 * rng.uniform_open();
                        worst = std::min(worst, log_quadratic_bound(s, t));
                      }
                      return std::vector{record("", "scalar", "(s,t) in (0,100]^2;samples=100000", worst, 0.0, tol)};
                    });
                  }});

  for (int n : {2, 3}) {
    const std::string id = "trace-sphere/n=" + std::to_string(n);
    jobs.push_back({"lemmas", id, [=, &ctx](Sink& out) {
                      timed(out, ctx, "lemmas", id, [&] {
                        Rng rng(ctx.seed_for("lemmas", id));
                        BoundResult worst;
                        double worst_score = kInf;
                        for (int k = 0; k < 1000; ++k) {
                          // Eigenvalues of M - I exceed -1 when M is positive definite.
                          const SymmetricMatrixSample s = random_symmetric(n, MatrixDomain::EigGtMinusOne, rng);
                          const Mat A = s.M - Mat::Identity(n, n);
                          const BoundResult b = trace_F_sphere_bound(A, rng.next(), 10000);
                          const double score = b.margin + 3.0 * b.std_error;
                          if (score < worst_score) worst_score = score, worst = b;
                        }
                        InequalityCase c = record("", "matrix:n=" + std::to_string(n), "samples=1000;mc=10000",
                                                  worst.lhs, worst.rhs, 3.0 * worst.std_error + tol,
                                                  "tolerance is 3 Monte Carlo standard errors");
                        return std::vector{c};
                      });
                    }});
  }

  jobs.push_back({"lemmas", "sphere-envelope", [&ctx, tol](Sink& out) {
                    timed(out, ctx, "lemmas", "sphere-envelope", [&] {
                      const SphereEnvelope e = sphere_norm_envelope(200);
                      return std::vector{record("lower", "sphere", "n<=200", e.lower, 0.79, tol),
                                         record("upper", "sphere", "n<=200", 1.0, e.upper, tol)};
                    });
                  }});
}

// ---------------------------------------------------------------------------
// 1D perturbation suites

std::string pert_id(const std::string& model, const std::string& pert, double eps) {
  return model + "/" + pert + "/eps=" + num(eps);
}

void plan_thm1(const Context& ctx, std::vector<Job>& jobs) {
  const auto models = ctx.models_or([] {
    std::vector<std::string> all = kBattery1D;
    all.insert(all.end(), kBattery2D.begin(), kBattery2D.end());
    return all;
  }());
  for (const auto& id : models) {
    const DensityModel m = model_from_id(id);
    if (m.dim() == 1) {
      for (const auto& pert : ctx.perts_or({"bump", "odd", "even"})) {
        for (double eps : ctx.eps_or({0.05, 0.1, 0.2})) {
          const std::string cid = pert_id(id, pert, eps);
          jobs.push_back({"thm1", cid, [=, &ctx](Sink& out) {
                            timed(out, ctx, "thm1", cid, [&] {
                              return std::vector{verify_thm1(m, make_perturbation(m, pert, eps), ctx.cfg.grid,
                                                             ctx.tol(1e-6))};
                            });
                          }});
        }
      }
    } else if (m.dim() == 2) {
      for (const auto& pert : ctx.perts_or({"bump", "odd"})) {
        for (double eps : ctx.eps_or({0.2})) {
          const std::string cid = pert_id(id, pert, eps);
          jobs.push_back({"thm1", cid, [=, &ctx](Sink& out) {
                            timed(out, ctx, "thm1", cid, [&] {
                              return std::vector{
                                  verify_thm1(m, make_perturbation_nd(m, pert, eps), 40, ctx.tol(1e-3))};
                            });
                          }});
        }
      }
    } else {
      jobs.push_back({"thm1", id, [id](Sink& out) {
                        out.skipped.push_back("thm1/" + id + ": the LP path supports n = 2 only");
                      }});
    }
  }
}

void plan_decomp(const Context& ctx, std::vector<Job>& jobs) {
  for (const auto& id : ctx.models_or(kBattery1D)) {
    const DensityModel m = model_from_id(id);
    if (m.dim() != 1) {
      jobs.push_back({"decomp", id, [id](Sink& out) { out.skipped.push_back("decomp/" + id + ": n = 1 only"); }});
      continue;
    }
    for (const auto& pert : ctx.perts_or({"bump", "even"})) {
      for (double eps : ctx.eps_or({0.1})) {
        const std::string cid = pert_id(id, pert, eps);
        jobs.push_back({"decomp", cid, [=, &ctx](Sink& out) {
                          timed(out, ctx, "decomp", cid, [&] {
                            const std::size_t cells = ctx.cfg.grid;
                            const double tol = ctx.tol(1e-4);
                            const DecompositionStudy s = decomposition_study(m, make_perturbation(m, pert, eps), cells, tol);
                            const std::string params = "pert=" + pert + ";eps=" + num(eps) + ";grid=" + std::to_string(cells);
                            const std::string detail = "entropy=" + num(s.coarse.entropy) + " transport=" +
                                                       num(s.coarse.transport) + " hessian=" + num(s.coarse.hessian_term);
                            InequalityCase residual = record("residual", id, params, 0.0, s.coarse.residual, tol, detail);
                            // Doubling the grid must cut the residual at least as fast as halving (+20%).
                            const bool floor = s.coarse.residual <= 1e-12 && s.fine.residual <= 1e-12;
                            InequalityCase order = record("order", id, params + ";fine=" + std::to_string(2 * cells),
                                                          floor ? 0.0 : 0.6 * s.coarse.residual,
                                                          floor ? 0.0 : s.fine.residual, 0.0,
                                                          "ratio=" + num(s.ratio));
                            return std::vector{residual, order};
                          });
                        }});
      }
    }
  }
}

// Cost-strengthened form (thm2 for Case One, thm3 for Case Two), the remainder form and the two
// comparisons on the same pair.
void plan_quantitative(const Context& ctx, std::vector<Job>& jobs, const std::string& suite) {
  const Case regime = suite == "thm2" ? Case::One : Case::Two;
  const std::vector<std::string> battery =
      regime == Case::One ? std::vector<std::string>(kBattery1D.begin(), kBattery1D.begin() + 3)
                          : std::vector<std::string>(kBattery1D.begin() + 3, kBattery1D.end());
  for (const auto& id : ctx.models_or(battery)) {
    const DensityModel m = model_from_id(id);
    if (m.dim() != 1 || m.kp().regime() != regime) {
      jobs.push_back({suite, id, [=](Sink& out) {
                        out.skipped.push_back(suite + "/" + id + ": needs a one-dimensional " +
                                              (regime == Case::One ? "Case One" : "Case Two") + " model");
                      }});
      continue;
    }
    for (const auto& pert : ctx.perts_or({"bump", "odd", "even"})) {
      for (double eps : ctx.eps_or({0.1, 0.2})) {
        const std::string cid = pert_id(id, pert, eps);
        jobs.push_back({suite, cid, [=, &ctx](Sink& out) {
                          const PoincareEstimate& h = ctx.cache.get(m);
                          if (!h.validated) {
                            out.skipped.push_back(suite + "/" + cid + ": h = " + num(h.h) +
                                                  " failed validation (worst margin " + num(h.worst_margin) + ")");
                            return;
                          }
                          timed(out, ctx, suite, cid, [&] {
                            const double tol = ctx.tol(1e-6);
                            const PerturbationSpec p = make_perturbation(m, pert, eps, true);
                            const std::size_t cells = ctx.cfg.grid;
                            const QuantitativeCase q = regime == Case::One
                                                           ? verify_thm2(m, p, h, cells, kTildeConstant, tol)
                                                           : verify_thm3(m, p, h, cells, kTildeConstant, tol);
                            InequalityCase main = q.result;
                            main.note = std::string("h via ") + to_string(h.method);
                            InequalityCase vs = record("vs-thm1", id, main.params, q.result.rhs, q.rhs_plain, 0.0,
                                                       "rhs with the added cost against the plain rhs");
                            InequalityCase half = record("half-h", id, main.params, q.result.rhs, q.rhs_half_h, 0.0,
                                                         "rhs at h against rhs at h/2");
                            InequalityCase rem = remainder_check(m, p, h, cells, kTildeConstant, tol);
                            rem.case_id = "remainder";
                            return std::vector{main, vs, half, rem};
                          });
                        }});
      }
    }
  }
}

void plan_linearize(const Context& ctx, std::vector<Job>& jobs) {
  for (const auto& id : ctx.models_or(kBattery1D)) {
    const DensityModel m = model_from_id(id);
    if (m.dim() != 1) {
      jobs.push_back({"linearize", id, [id](Sink& out) { out.skipped.push_back("linearize/" + id + ": n = 1 only"); }});
      continue;
    }
    for (const auto& pert : ctx.perts_or({"bump", "odd", "even", "ratio"})) {
      const std::string cid = id + "/" + pert;
      jobs.push_back({"linearize", cid, [=, &ctx](Sink& out) {
                        timed(out, ctx, "linearize", cid, [&] {
                          const PerturbationSpec g = make_perturbation(m, pert, 0.0);
                          const std::size_t cells = ctx.cfg.grid;
                          const Linearization lin = entropy_linearization(m, g, {0.1, 0.05, 0.025, 0.0125}, cells);
                          const double tol = ctx.tol(1e-6);
                          const TransportLinearization tl =
                              transport_linearization_lb(m, g, {}, {}, {0.1, 0.05, 0.025, 0.0125}, cells, tol);
                          const std::string params = "pert=" + pert + ";grid=" + std::to_string(cells);
                          std::string ratios;
                          for (double r : lin.ratios) ratios += (ratios.empty() ? "" : ",") + num(r);
                          InequalityCase entropy =
                              record("entropy", id, params + ";target=" + num(lin.target), 0.0, lin.rel_error,
                                     ctx.tol(1e-3), "relative error after extrapolation; ratios " + ratios);
                          InequalityCase mono = record("monotone", id, params, lin.monotone ? 1.0 : 0.0, 1.0, 0.0,
                                                       "1 when |ratio - target| decreases along the sweep");
                          std::string tratios;
                          for (double r : tl.ratios) tratios += (tratios.empty() ? "" : ",") + num(r);
                          InequalityCase lb = record("transport-lb", id, params, tl.extrapolated, tl.lower_bound, tol,
                                                     "extrapolated eps->0 value; ratios " + tratios);
                          return std::vector{entropy, mono, lb};
                        });
                      }});
    }
  }
}

void plan_bl(const Context& ctx, std::vector<Job>& jobs) {
  const double tol = ctx.tol(1e-9);
  for (const auto& id : ctx.models_or(kBattery1D)) {
    const DensityModel m = model_from_id(id);
    if (m.dim() != 1) {
      jobs.push_back({"bl", id, [id](Sink& out) { out.skipped.push_back("bl/" + id + ": n = 1 only"); }});
      continue;
    }
    for (int degree = 1; degree <= 4; ++degree) {
      const std::string cid = id + "/degree=" + std::to_string(degree);
      jobs.push_back({"bl", cid, [=, &ctx](Sink& out) {
                        PolyG g;
                        try {
                          g = orthogonal_polynomial(m, degree, false);
                        } catch (const DomainError& e) {
                          out.skipped.push_back("bl/" + cid + ": " + e.what());
                          return;
                        }
                        timed(out, ctx, "bl", cid, [&] {
                          InequalityCase c = verify_bl(
                              m, [&](double x) { return g.value(x); }, [&](double x) { return g.derivative(x); },
                              degree, tol);
                          c.params = "g=orthogonal to {1};degree=" + std::to_string(degree);
                          return std::vector{c};
                        });
                      }});
    }
  }
  if (ctx.cfg.models.empty()) {
    // g = x on W = lambda (1 + x^2), beta = 2.
    jobs.push_back({"bl", "cauchy:beta=2,n=1/g=x", [&ctx, tol](Sink& out) {
                      timed(out, ctx, "bl", "cauchy:beta=2,n=1/g=x", [&] {
                        const DensityModel m = model_from_id("cauchy:beta=2,n=1");
                        InequalityCase c = verify_bl(m, [](double x) { return x; }, [](double) { return 1.0; }, 1, tol);
                        c.params = "g=x";
                        return std::vector{c};
                      });
                    }});
  }
}

void plan_bl_quant(const Context& ctx, std::vector<Job>& jobs) {
  const double tol = ctx.tol(1e-9);
  struct Dir {
    std::string name;
    std::function<double(double)> g, dg;
  };
  for (const auto& id : ctx.models_or(kBattery1D)) {
    const DensityModel m = model_from_id(id);
    if (m.dim() != 1) {
      jobs.push_back({"bl-quant", id, [id](Sink& out) { out.skipped.push_back("bl-quant/" + id + ": n = 1 only"); }});
      continue;
    }
    std::vector<std::string> names;
    for (int d = 2; d <= 4; ++d) names.push_back("degree=" + std::to_string(d));
    names.push_back("even-decay");
    names.push_back("odd-decay");
    for (const auto& name : names) {
      const std::string cid = id + "/" + name;
      jobs.push_back({"bl-quant", cid, [=, &ctx](Sink& out) {
                        Dir dir{name, {}, {}};
                        try {
                          if (name.rfind("degree=", 0) == 0) {
                            const PolyG p = orthogonal_polynomial(m, std::stoi(name.substr(7)), true);
                            dir.g = [p](double x) { return p.value(x); };
                            dir.dg = [p](double x) { return p.derivative(x); };
                          } else {
                            const PerturbationSpec p = make_perturbation(m, name.substr(0, name.find('-')), 0.0, true);
                            dir.g = p.g;
                            dir.dg = p.dg;
                          }
                        } catch (const DomainError& e) {
                          out.skipped.push_back("bl-quant/" + cid + ": " + e.what());
                          return;
                        }
                        const PoincareEstimate& h = ctx.cache.get(m);
                        if (!h.validated) {
                          out.skipped.push_back("bl-quant/" + cid + ": h failed validation");
                          return;
                        }
                        timed(out, ctx, "bl-quant", cid, [&] {
                          const QuantitativeBL q = verify_bl_quant(m, dir.g, dir.dg, h, kTildeConstant, tol);
                          InequalityCase main = q.result;
                          main.params = "g=" + name + ";" + main.params;
                          std::vector<InequalityCase> rs{main};
                          if (std::isfinite(q.lhs_plain) && std::isfinite(q.result.lhs))
                            rs.push_back(record("sharpening", id, main.params, q.lhs_plain, q.result.lhs, 0.0,
                                                "unshifted lhs against shifted lhs"));
                          return rs;
                        });
                      }});
    }
  }
}

// ---------------------------------------------------------------------------
// poincare

void plan_poincare(const Context& ctx, std::vector<Job>& jobs) {
  const double tol = ctx.tol(1e-8);
  std::vector<std::string> models = ctx.models_or([] {
    std::vector<std::string> all = kChainModels;
    all.push_back("ball:sigma=1,beta=2,n=1");
    return all;
  }());
  for (const auto& id : models) {
    const DensityModel m = model_from_id(id);
    if (m.kp().regime() == Case::One || ctx.cfg.h) {
      jobs.push_back({"poincare", id, [=, &ctx](Sink& out) {
                        timed(out, ctx, "poincare", id, [&] {
                          const PoincareEstimate& e = ctx.cache.get(m);
                          InequalityCase c = record(ctx.cfg.h ? "supplied" : "search", id,
                                                    "h=" + num(e.h) + ";family=" + e.family_version, e.worst_margin,
                                                    0.0, tol, std::string("method ") + to_string(e.method));
                          c.pass = c.pass && e.validated;
                          return std::vector{c};
                        });
                      }});
      continue;
    }
    jobs.push_back({"poincare", id, [=, &ctx](Sink& out) {
                      timed(out, ctx, "poincare", id, [&] {
                        const ChainResult ch = cauchy_chain(m, ctx.cfg.c_kappa);
                        const int n = m.dim();
                        const double beta = m.kp().beta();
                        const std::string params = "C=" + num(ch.c_kappa) + ";h=" + num(ch.bound.h) + ";m=" +
                                                   num(ch.m) + ";family=" + ch.estimate.family_version;
                        InequalityCase chain = record("chain", id, params, ch.estimate.worst_margin, 0.0, tol);
                        chain.pass = chain.pass && ch.estimate.validated;
                        double cheeger = kInf;
                        for (const auto& fm : ch.cheeger.margins) cheeger = std::min(cheeger, fm.margin);
                        InequalityCase ch_rec = record("cheeger", id, "C=" + num(ch.c_kappa), cheeger, 0.0, tol,
                                                       "family minimum C=" + num(ch.cheeger.minimal_constant));
                        InequalityCase radius = record("m<=m1", id, "", ch.bound.m1, ch.bound.m, 0.0);
                        // Transfer: whenever the L1 hypothesis holds, the F-form conclusion must too.
                        const QuadMeasure mu = quadrature_measure(m);
                        const TestFamily fam = standard_family(n, model_length(m));
                        // The transfer is a statement about a whole class: its L1 hypothesis
                        // must hold for the level-set functions too, so C also covers near
                        // indicators of half-spaces.
                        const auto omega = cauchy_weight(ch.m, n, beta);
                        const CheegerResult steps = cheeger_l1_check(mu, omega, 1.0, step_family(n, model_length(m), n == 1 ? 0.1 : 0.25));
                        const double c_class = std::max(ch.c_kappa, steps.minimal_constant);
                        const double h_l1 = 2.0 / c_class;
                        const auto tr = proposition1_transfer(mu, omega, h_l1, fam);
                        double worst = kInf;
                        std::size_t active = 0;
                        for (const auto& t : tr)
                          if (t.hypothesis >= 0.0) worst = std::min(worst, t.conclusion), ++active;
                        InequalityCase transfer =
                            record("transfer", id, "C=" + num(c_class) + ";h=" + num(h_l1), active ? worst : 0.0, 0.0, tol,
                                   std::to_string(active) + " functions satisfy the hypothesis");
                        return std::vector{chain, ch_rec, radius, transfer};
                      });
                    }});
  }
  if (ctx.cfg.models.empty()) {
    for (int n = 1; n <= 3; ++n) {
      const double beta = 100.0 * (n + 1);
      const std::string cid = "laplace/n=" + std::to_string(n) + "/beta=" + num(beta);
      jobs.push_back({"poincare", cid, [=, &ctx](Sink& out) {
                        timed(out, ctx, "poincare", cid, [&] {
                          const LaplaceResult l = laplace_In(n, beta);
                          return std::vector{record("", "laplace", "ratio=" + num(l.ratio), 0.05,
                                                    std::abs(l.ratio - 1.0), 0.0, "numeric over asymptotic, within 5%")};
                        });
                      }});
    }
  }
}

// ---------------------------------------------------------------------------

void plan(const std::string& suite, const Context& ctx, std::vector<Job>& jobs) {
  if (suite == "lemmas") return plan_lemmas(ctx, jobs);
  if (suite == "thm1") return plan_thm1(ctx, jobs);
  if (suite == "decomp") return plan_decomp(ctx, jobs);
  if (suite == "thm2" || suite == "thm3") return plan_quantitative(ctx, jobs, suite);
  if (suite == "linearize") return plan_linearize(ctx, jobs);
  if (suite == "bl") return plan_bl(ctx, jobs);
  if (suite == "bl-quant") return plan_bl_quant(ctx, jobs);
  if (suite == "poincare") return plan_poincare(ctx, jobs);
  throw ConfigError("unknown suite '" + suite + "'");
}

}  // namespace

const std::vector<std::string>& suite_ids() { return kSuites; }

bool suite_needs_seed(const std::string& id) { return id == "lemmas" || id == "all"; }

void SuiteConfig::validate() const {
  if (suite != "all" && std::find(kSuites.begin(), kSuites.end(), suite) == kSuites.end())
    throw ConfigError("unknown suite '" + suite + "'");
  if (suite_needs_seed(suite) && !seed) throw ConfigError("suite '" + suite + "' draws random samples: --seed is required");
  for (const auto& id : models) {
    try {
      (void)model_from_id(id);
    } catch (const Error& e) {
      throw ConfigError("bad model '" + id + "': " + e.what());
    }
  }
  for (const auto& p : perts)
    if (std::find(perturbation_kinds().begin(), perturbation_kinds().end(), p) == perturbation_kinds().end())
      throw ConfigError("unknown perturbation '" + p + "'");
  for (double e : eps)
    if (!(e >= 0.0 && e < 1.0)) throw ConfigError("eps must lie in [0, 1), got " + num(e));
  if (grid < 16) throw ConfigError("grid must be at least 16");
  if (tol && !(*tol >= 0.0)) throw ConfigError("tolerance must be nonnegative");
  if (h && !(*h >= 0.0)) throw ConfigError("h must be nonnegative");
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
}

std::string SuiteConfig::to_json() const {
  nlohmann::ordered_json j;
  j["suite"] = suite;
  j["models"] = models;
  j["grid"] = grid;
  j["eps"] = eps;
  j["perts"] = perts;
  j["seed"] = seed ? nlohmann::ordered_json(*seed) : nlohmann::ordered_json(nullptr);
  j["tol"] = tol ? nlohmann::ordered_json(*tol) : nlohmann::ordered_json(nullptr);
  j["c_kappa"] = c_kappa;
  j["h"] = h ? nlohmann::ordered_json(*h) : nlohmann::ordered_json(nullptr);
  return j.dump();
}

bool VerificationReport::all_pass() const {
  if (!errors.empty()) return false;
  return std::all_of(cases.begin(), cases.end(), [](const InequalityCase& c) { return c.pass; });
}

std::uint64_t derive_seed(std::uint64_t seed, const std::string& tag) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : tag) h = (h ^ ch) * 1099511628211ull;
  // splitmix64 finalizer over the mixed value
  std::uint64_t z = seed ^ (h + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

VerificationReport run(const SuiteConfig& config) {
  config.validate();
  VerificationReport report;
  report.tool_version = KAPPAOT_VERSION;
  report.config_json = config.to_json();

  PoincareCache cache(config);
  const Context ctx{config, cache};
  std::vector<Job> jobs;
  const std::vector<std::string> selected = config.suite == "all" ? kSuites : std::vector<std::string>{config.suite};
  for (const auto& s : selected) plan(s, ctx, jobs);

  std::vector<Sink> sinks(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      try {
        jobs[k].body(sinks[k]);
      } catch (const std::exception& e) {
        sinks[k].errors.push_back(jobs[k].suite + "/" + jobs[k].label + ": " + e.what());
      }
    }
  };
  const int nthreads = std::max(1, std::min<int>(config.jobs, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (auto& s : sinks) {
    for (auto& c : s.cases) report.cases.push_back(std::move(c));
    for (auto& m : s.skipped) report.skipped.push_back(std::move(m));
    for (auto& m : s.errors) report.errors.push_back(std::move(m));
  }
  return report;
}

}  // namespace kappaot
