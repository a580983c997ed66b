#include "doctest.h"
#include "kappaot/inequalities.hpp"
#include "kappaot/transport.hpp"
#include "oracles.hpp"

using namespace kappaot;

namespace {

DiscreteMeasure line_measure(const std::vector<double>& xs, const std::vector<double>& ws) {
  std::vector<Vec> pts;
  for (double x : xs) pts.push_back(Vec::Constant(1, x));
  return make_measure(1, pts, ws);
}

DiscreteMeasure random_line_measure(oracle::Gen& gen, int n) {
  std::vector<double> xs, ws;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    xs.push_back(gen.uniform(-3, 3));
    ws.push_back(gen.uniform(0.1, 1.0));
    total += ws.back();
  }
  for (double& w : ws) w /= total;
  double s = 0.0;
  for (int i = 0; i + 1 < n; ++i) s += ws[i];
  ws.back() = 1.0 - s;
  return line_measure(xs, ws);
}

}  // namespace

TEST_CASE("transportation LP trivial instances") {
  const DiscreteMeasure a = line_measure({0.0, 1.0, 2.0}, {0.2, 0.3, 0.5});
  CHECK(wasserstein_p(a, a, 2.0) == doctest::Approx(0.0));
  const DiscreteMeasure d0 = line_measure({0.0}, {1.0});
  const DiscreteMeasure d1 = line_measure({1.0}, {1.0});
  CHECK(wasserstein_p(d0, d1, 2.0) == doctest::Approx(1.0));
  CHECK(wasserstein_p(d0, line_measure({2.5}, {1.0}), 2.0) == doctest::Approx(6.25));
}

TEST_CASE("LP equals the permutation minimum on uniform instances") {
  oracle::Gen gen(2024);
  for (int k = 0; k < 20; ++k) {
    std::vector<std::vector<double>> C(4, std::vector<double>(4));
    std::vector<double> flat;
    for (auto& row : C)
      for (double& c : row) c = gen.uniform(0, 10), flat.push_back(c);
    const std::vector<double> w(4, 0.25);
    const TransportPlan plan = solve_transportation(w, w, flat);
    CHECK(plan.total_cost == doctest::Approx(oracle::brute_force_assignment(C)).epsilon(1e-14));
    CHECK(plan.marginal_error <= 1e-14);
    CHECK(plan.min_reduced_cost >= -1e-12);
    CHECK(std::abs(plan.dual_gap) <= 1e-12);
  }
}

TEST_CASE("LP duality on random rectangular instances") {
  oracle::Gen gen(7);
  for (int k = 0; k < 30; ++k) {
    const int m = gen.integer(1, 12), n = gen.integer(1, 12);
    std::vector<double> a(m), b(n), cost(m * n);
    double sa = 0, sb = 0;
    for (double& x : a) sa += (x = gen.uniform(0.0, 1.0));
    for (double& x : b) sb += (x = gen.uniform(0.0, 1.0));
    for (double& x : a) x /= sa;
    for (double& x : b) x /= sb;
    for (double& c : cost) c = gen.uniform(0, 5);
    const TransportPlan plan = solve_transportation(a, b, cost);
    double dual = 0.0;
    for (int i = 0; i < m; ++i) dual += a[i] * plan.f[i];
    for (int j = 0; j < n; ++j) dual += b[j] * plan.g[j];
    CHECK(dual == doctest::Approx(plan.total_cost).epsilon(1e-12).scale(1.0));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) CHECK_UNARY(plan.f[i] + plan.g[j] <= cost[i * n + j] + 1e-12);
    double primal = 0.0;
    for (const auto& t : plan.coupling) primal += t.mass * cost[t.i * n + t.j];
    CHECK(primal == doctest::Approx(plan.total_cost).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("quantile formula agrees with the LP in one dimension") {
  oracle::Gen gen(11);
  for (int k = 0; k < 20; ++k) {
    const DiscreteMeasure mu = random_line_measure(gen, gen.integer(2, 30));
    const DiscreteMeasure nu = random_line_measure(gen, gen.integer(2, 30));
    for (double p : {1.0, 2.0}) {
      const double lp = wasserstein_p(mu, nu, p);
      CHECK(wasserstein_p_quantile(mu, nu, p) == doctest::Approx(lp).epsilon(1e-10));
    }
  }
}

TEST_CASE("cost superadditivity of the optimal value") {
  oracle::Gen gen(13);
  for (int k = 0; k < 50; ++k) {
    const DiscreteMeasure mu = random_line_measure(gen, 6);
    const DiscreteMeasure nu = random_line_measure(gen, 7);
    auto c1 = [](const Vec& x, const Vec& y) { return (x - y).squaredNorm(); };
    auto c2 = [](const Vec& x, const Vec& y) { return std::abs(x[0] - y[0] - 0.5); };
    const double w1 = solve_discrete_ot(mu, nu, c1).total_cost;
    const double w2 = solve_discrete_ot(mu, nu, c2).total_cost;
    const double w12 = solve_discrete_ot(mu, nu, [&](const Vec& x, const Vec& y) { return c1(x, y) + c2(x, y); }).total_cost;
    CHECK_UNARY(w12 >= w1 + w2 - 1e-12);
  }
}

TEST_CASE("monotone map") {
  const Density1D u1(Grid1D::linear(0.0, 1.0, 512), [](double) { return 1.0; });
  const Density1D u2(Grid1D::linear(0.0, 2.0, 512), [](double) { return 1.0; });
  const MonotoneMap1D id = monotone_map_1d(u1, u1);
  for (std::size_t i = 0; i < id.x.size(); ++i) CHECK(id.T[i] == doctest::Approx(id.x[i]).epsilon(1e-12));
  const MonotoneMap1D dbl = monotone_map_1d(u1, u2);
  for (std::size_t i = 0; i < dbl.x.size(); ++i) CHECK(std::abs(dbl.T[i] - 2.0 * dbl.x[i]) <= 1e-8);
  CHECK(ma_residual(dbl, u1, u2) <= 1e-8);

  const DensityModel m = model_from_id("cauchy:beta=2,n=1");
  const PerturbationSpec p = make_perturbation(m, "bump", 0.1);
  const Density1D src = Density1D::of_model(m, 4096);
  const Density1D tgt = Density1D::perturbed(m, p.g, 0.1, 4096);
  const MonotoneMap1D map = monotone_map_1d(src, tgt);
  CHECK(pushforward_residual(map, src, tgt) <= 1e-6);

  // Second-order Monge-Ampere residual under grid halving.
  const Density1D src2 = Density1D::of_model(m, 8192);
  const Density1D tgt2 = Density1D::perturbed(m, p.g, 0.1, 8192);
  const double r1 = ma_residual(map, src, tgt);
  const double r2 = ma_residual(monotone_map_1d(src2, tgt2), src2, tgt2);
  CHECK(r2 <= 0.35 * r1);
}

TEST_CASE("cost along the monotone map") {
  const DensityModel m = model_from_id("cauchy:beta=2,n=1");
  const Density1D src = Density1D::of_model(m, 4096);
  CHECK(transport_cost_along_map(monotone_map_1d(src, src), src, [](double x, double y) { return (x - y) * (x - y); }) ==
        doctest::Approx(0.0).scale(1.0));

  // Narrow source against a translate.
  auto narrow = [](double c) { return [c](double x) { return std::exp(-0.5 * (x - c) * (x - c) / 1e-4); }; };
  const Density1D a(Grid1D::linear(-1.0, 2.0, 4096), narrow(0.0));
  const Density1D b(Grid1D::linear(-1.0, 2.0, 4096), narrow(0.7));
  const double shift = transport_cost_along_map(monotone_map_1d(a, b), a, [](double x, double y) { return (x - y) * (x - y); });
  CHECK(shift == doctest::Approx(0.49).epsilon(1e-6));

  // LP between equal-weight quantile clouds of the same pair.
  const PerturbationSpec p = make_perturbation(m, "odd", 0.1);
  const Density1D tgt = Density1D::perturbed(m, p.g, 0.1, 4096);
  const CostSpec cs(m.kp(), m.w());
  const double along = transport_cost_along_map(monotone_map_1d(src, tgt), src,
                                                [&](double x, double y) { return cost_c(x, y, cs); });
  const int N = 600;
  std::vector<Vec> xs, ys;
  for (int i = 0; i < N; ++i) {
    const double u = (i + 0.5) / N;
    xs.push_back(Vec::Constant(1, src.quantile(u)));
    ys.push_back(Vec::Constant(1, tgt.quantile(u)));
  }
  const std::vector<double> w(N, 1.0 / N);
  // Shuffle the targets so the LP has to find the monotone order itself.
  oracle::Gen gen(1);
  for (int i = N - 1; i > 0; --i) std::swap(ys[i], ys[gen.integer(0, i)]);
  const double lp = solve_discrete_ot(make_measure(1, xs, w), make_measure(1, ys, w),
                                      [&](const Vec& x, const Vec& y) { return cost_c(x, y, cs); })
                        .total_cost;
  CHECK(lp == doctest::Approx(along).epsilon(1e-4));
}
