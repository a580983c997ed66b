#include "kappaot/numerics.hpp"

#include <algorithm>
#include <map>
#include <mutex>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace kappaot {

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform_open();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(phi);
  has_spare_ = true;
  return r * std::cos(phi);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol, unsigned max_depth) {
  using boost::math::quadrature::gauss_kronrod;
  if (a == b) return 0.0;
  return gauss_kronrod<double, 31>::integrate(f, a, b, max_depth, rel_tol);
}

namespace {

template <int N>
GaussRule make_rule() {
  using boost::math::quadrature::gauss;
  GaussRule rule;
  const auto& abs = gauss<double, N>::abscissa();
  const auto& wts = gauss<double, N>::weights();
  // Boost stores the nonnegative half of a symmetric rule.
  for (std::size_t k = 0; k < abs.size(); ++k) {
    const double x = abs[k];
    const double w = wts[k];
    if (x == 0.0) {
      rule.nodes.push_back(0.0);
      rule.weights.push_back(w);
    } else {
      rule.nodes.push_back(-x);
      rule.weights.push_back(w);
      rule.nodes.push_back(x);
      rule.weights.push_back(w);
    }
  }
  std::vector<std::size_t> idx(rule.nodes.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](auto i, auto j) { return rule.nodes[i] < rule.nodes[j]; });
  GaussRule sorted;
  for (auto i : idx) {
    sorted.nodes.push_back(rule.nodes[i]);
    sorted.weights.push_back(rule.weights[i]);
  }
  return sorted;
}

}  // namespace

const GaussRule& gauss_legendre(int order) {
  static const GaussRule r2 = make_rule<2>();
  static const GaussRule r4 = make_rule<4>();
  static const GaussRule r6 = make_rule<6>();
  static const GaussRule r8 = make_rule<8>();
  static const GaussRule r10 = make_rule<10>();
  static const GaussRule r20 = make_rule<20>();
  switch (order) {
    case 2: return r2;
    case 4: return r4;
    case 6: return r6;
    case 8: return r8;
    case 10: return r10;
    case 20: return r20;
    default: throw DomainError("gauss_legendre: supported orders are 2, 4, 6, 8, 10, 20");
  }
}

Grid1D Grid1D::linear(double lo, double hi, std::size_t cells) {
  if (!(hi > lo) || cells == 0) throw DomainError("Grid1D::linear: need lo < hi and cells > 0");
  Grid1D g;
  g.map_ = Map::Linear;
  g.a_ = lo;
  g.b_ = hi;
  g.s_lo_ = 0.0;
  g.s_hi_ = 1.0;
  g.cells_ = cells;
  g.h_ = 1.0 / static_cast<double>(cells);
  return g;
}

Grid1D Grid1D::tangent(double center, double scale, std::size_t cells) {
  if (!(scale > 0.0) || cells == 0) throw DomainError("Grid1D::tangent: need scale > 0 and cells > 0");
  Grid1D g;
  g.map_ = Map::Tangent;
  g.a_ = center;
  g.b_ = scale;
  g.s_lo_ = -std::numbers::pi / 2;
  g.s_hi_ = std::numbers::pi / 2;
  g.cells_ = cells;
  g.h_ = std::numbers::pi / static_cast<double>(cells);
  return g;
}

double Grid1D::x_of_s(double s) const {
  if (map_ == Map::Linear) return a_ + (b_ - a_) * s;
  return a_ + b_ * std::tan(s);
}

double Grid1D::dx_ds(double s) const {
  if (map_ == Map::Linear) return b_ - a_;
  const double c = std::cos(s);
  return b_ / (c * c);
}

double Grid1D::s_of_x(double x) const {
  if (map_ == Map::Linear) return (x - a_) / (b_ - a_);
  return std::atan((x - a_) / b_);
}

double Grid1D::edge(std::size_t k) const {
  if (map_ == Map::Tangent) {
    if (k == 0) return -kInf;
    if (k == cells_) return kInf;
  }
  return x_of_s(edge_s(k));
}

std::size_t Grid1D::cell_of(double x) const {
  const double s = s_of_x(x);
  const double k = std::floor((s - s_lo_) / h_);
  if (!(k > 0.0)) return 0;
  if (k >= static_cast<double>(cells_)) return cells_ - 1;
  return static_cast<std::size_t>(k);
}

Grid1D Grid1D::refined(std::size_t factor) const {
  Grid1D g = *this;
  g.cells_ = cells_ * factor;
  g.h_ = h_ / static_cast<double>(factor);
  return g;
}

Rule1D composite_rule(const Grid1D& grid, int order) {
  const auto& gl = gauss_legendre(order);
  Rule1D rule;
  rule.x.reserve(grid.cells() * gl.nodes.size());
  rule.w.reserve(grid.cells() * gl.nodes.size());
  const double half = 0.5 * grid.h();
  for (std::size_t k = 0; k < grid.cells(); ++k) {
    const double mid = grid.edge_s(k) + half;
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      const double s = mid + half * gl.nodes[q];
      rule.x.push_back(grid.x_of_s(s));
      rule.w.push_back(half * gl.weights[q] * grid.dx_ds(s));
    }
  }
  return rule;
}

double integrate_gl(const std::function<double(double)>& f, double lo, double hi, int pieces,
                    int order) {
  const auto& gl = gauss_legendre(order);
  const double width = (hi - lo) / pieces;
  double total = 0.0;
  for (int p = 0; p < pieces; ++p) {
    const double a = lo + p * width;
    const double half = 0.5 * width;
    const double mid = a + half;
    double part = 0.0;
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) part += gl.weights[q] * f(mid + half * gl.nodes[q]);
    total += half * part;
  }
  return total;
}

TensorRule tensor_rule(const Rule1D& axis, int dim) {
  if (dim < 1 || dim > 3) throw DomainError("tensor_rule: dimension must be 1, 2 or 3");
  return tensor_rule(std::vector<Rule1D>(static_cast<std::size_t>(dim), axis));
}

TensorRule tensor_rule(const std::vector<Rule1D>& axes) {
  const int dim = static_cast<int>(axes.size());
  if (dim < 1 || dim > 3) throw DomainError("tensor_rule: dimension must be 1, 2 or 3");
  TensorRule rule;
  rule.dim = dim;
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.x.size();
  rule.points.resize(total * axes.size());
  rule.weights.resize(total);
  for (std::size_t k = 0; k < total; ++k) {
    std::size_t rem = k;
    double w = 1.0;
    for (int d = dim - 1; d >= 0; --d) {
      const auto& a = axes[static_cast<std::size_t>(d)];
      const std::size_t i = rem % a.x.size();
      rem /= a.x.size();
      rule.points[k * axes.size() + static_cast<std::size_t>(d)] = a.x[i];
      w *= a.w[i];
    }
    rule.weights[k] = w;
  }
  return rule;
}

double log_sphere_area(int n) {
  return std::log(2.0) + 0.5 * n * std::log(std::numbers::pi) - std::lgamma(0.5 * n);
}

double cauchy_radial_moment(double p, double beta, double alpha) {
  // int_0^inf r^p (1 + a r^2)^{-b} dr = a^{-(p+1)/2} B((p+1)/2, b-(p+1)/2) / 2
  const double a = 0.5 * (p + 1.0);
  const double b = beta - a;
  if (!(a > 0.0) || !(b > 0.0)) throw DivergenceError("cauchy_radial_moment: integral diverges");
  const double log_beta_fn = std::lgamma(a) + std::lgamma(b) - std::lgamma(beta);
  return 0.5 * std::exp(log_beta_fn - a * std::log(alpha));
}

bool tail_integrable(const std::function<double(const Vec&)>& f, int dim) {
  for (int d = 0; d < dim; ++d) {
    for (double sign : {-1.0, 1.0}) {
      double prev = -1.0;
      for (double r : {1e3, 1e5, 1e7}) {
        Vec x = Vec::Zero(dim);
        x[d] = sign * r;
        const double v = std::abs(f(x)) * std::pow(r, dim);
        if (!std::isfinite(v)) return false;
        if (prev >= 0.0 && v > 1e-300 && v > 0.5 * prev) return false;
        prev = v;
      }
    }
  }
  return true;
}

double richardson(const std::vector<double>& values, int levels) {
  if (values.empty()) throw DomainError("richardson: empty sequence");
  std::vector<double> t = values;
  for (int level = 1; level <= levels && t.size() > 1; ++level) {
    const double f = std::ldexp(1.0, level);
    std::vector<double> next;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) next.push_back((f * t[i + 1] - t[i]) / (f - 1.0));
    t = std::move(next);
  }
  return t.back();
}

}  // namespace kappaot
