#include "kappaot/transport.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace kappaot {

TransportPlan solve_discrete_ot(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Mat& cost) {
  mu.validate();
  nu.validate();
  if (cost.rows() != static_cast<Eigen::Index>(mu.size()) || cost.cols() != static_cast<Eigen::Index>(nu.size()))
    throw DomainError("solve_discrete_ot: cost matrix shape does not match the measures");
  std::vector<double> c(mu.size() * nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = 0; j < nu.size(); ++j)
      c[i * nu.size() + j] = cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return solve_transportation(mu.weights, nu.weights, c);
}

TransportPlan solve_discrete_ot(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                const std::function<double(const Vec&, const Vec&)>& cost) {
  mu.validate();
  nu.validate();
  std::vector<double> c(mu.size() * nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = 0; j < nu.size(); ++j) c[i * nu.size() + j] = cost(mu.points[i], nu.points[j]);
  return solve_transportation(mu.weights, nu.weights, c);
}

void write_plan_csv(const TransportPlan& plan, std::ostream& out) {
  out << "i,j,mass\n";
  char buf[64];
  for (const auto& t : plan.coupling) {
    std::snprintf(buf, sizeof buf, "%.17g", t.mass);
    out << t.i << ',' << t.j << ',' << buf << '\n';
  }
}

// ---------------------------------------------------------------------------
// One-dimensional maps

MonotoneMap1D monotone_map_1d(const Density1D& src, const Density1D& tgt) {
  const Grid1D& g = src.grid();
  const std::size_t n = g.cells();
  if (n < 3) throw DomainError("monotone_map_1d: need at least 3 grid cells");
  MonotoneMap1D map;
  map.grid = g;
  map.x.resize(n);
  map.T.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = g.node(i);
    map.x[i] = x;
    // Match whichever tail probability is smaller to keep relative precision.
    const double lower = src.cdf(x);
    map.T[i] = lower <= 0.5 ? tgt.quantile(lower) : tgt.upper_quantile(src.survival(x));
  }
  for (std::size_t i = 1; i < n; ++i)
    if (map.T[i] < map.T[i - 1]) map.T[i] = map.T[i - 1];

  map.theta_grad.resize(n);
  for (std::size_t i = 0; i < n; ++i) map.theta_grad[i] = map.T[i] - map.x[i];

  // d(theta')/dx = d(theta')/ds / (dx/ds); second order in s everywhere.
  map.theta_hess.resize(n);
  const double h = g.h();
  const auto& d = map.theta_grad;
  for (std::size_t i = 0; i < n; ++i) {
    double ds;
    if (i == 0) ds = (-3.0 * d[0] + 4.0 * d[1] - d[2]) / (2.0 * h);
    else if (i == n - 1) ds = (3.0 * d[n - 1] - 4.0 * d[n - 2] + d[n - 3]) / (2.0 * h);
    else ds = (d[i + 1] - d[i - 1]) / (2.0 * h);
    map.theta_hess[i] = ds / g.jacobian(i);
  }
  return map;
}

double ma_residual(const MonotoneMap1D& map, const Density1D& src, const Density1D& tgt) {
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < map.x.size(); ++i) {
    const double r = src.pdf(map.x[i]) - tgt.pdf(map.T[i]) * (1.0 + map.theta_hess[i]);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

double pushforward_residual(const MonotoneMap1D& map, const Density1D& src, const Density1D& tgt) {
  double worst = 0.0;
  for (std::size_t i = 0; i < map.x.size(); ++i)
    worst = std::max(worst, std::abs(tgt.cdf(map.T[i]) - src.cdf(map.x[i])));
  return worst;
}

double transport_cost_along_map(const MonotoneMap1D& map, const Density1D& src,
                                const std::function<double(double, double)>& cost) {
  const Grid1D& g = map.grid;
  double acc = 0.0;
  for (std::size_t i = 0; i < map.x.size(); ++i) {
    const double p = src.pdf(map.x[i]);
    if (p == 0.0) continue;
    acc += cost(map.x[i], map.T[i]) * p * g.jacobian(i);
  }
  return acc * g.h();
}

// ---------------------------------------------------------------------------
// Wasserstein distances

double wasserstein_p(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p) {
  if (!(p >= 1.0)) throw DomainError("wasserstein_p: p must be >= 1");
  if (mu.dim != nu.dim) throw DomainError("wasserstein_p: dimension mismatch");
  return solve_discrete_ot(mu, nu, [p](const Vec& x, const Vec& y) { return std::pow((x - y).norm(), p); })
      .total_cost;
}

namespace {

struct Atoms {
  std::vector<double> x;
  std::vector<double> w;
};

Atoms sorted_atoms(const DiscreteMeasure& m) {
  if (m.dim != 1) throw DomainError("quantile coupling: one-dimensional measures only");
  std::vector<std::size_t> idx(m.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return m.points[a][0] < m.points[b][0]; });
  Atoms out;
  for (auto i : idx) {
    out.x.push_back(m.points[i][0]);
    out.w.push_back(m.weights[i]);
  }
  return out;
}

}  // namespace

double quantile_coupling_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                              const std::function<double(double, double)>& cost) {
  mu.validate();
  nu.validate();
  Atoms a = sorted_atoms(mu), b = sorted_atoms(nu);
  // North-west corner rule on sorted atoms.
  std::size_t i = 0, j = 0;
  double ra = a.w[0], rb = b.w[0], total = 0.0;
  while (i < a.x.size() && j < b.x.size()) {
    const double q = std::min(ra, rb);
    total += q * cost(a.x[i], b.x[j]);
    ra -= q;
    rb -= q;
    if (ra <= 0.0 && ++i < a.x.size()) ra = a.w[i];
    if (rb <= 0.0 && ++j < b.x.size()) rb = b.w[j];
  }
  return total;
}

double wasserstein_p_quantile(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p) {
  if (!(p >= 1.0)) throw DomainError("wasserstein_p_quantile: p must be >= 1");
  return quantile_coupling_cost(mu, nu, [p](double x, double y) { return std::pow(std::abs(x - y), p); });
}

}  // namespace kappaot
