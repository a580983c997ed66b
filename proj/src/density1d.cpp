#include "kappaot/density1d.hpp"

#include <algorithm>

namespace kappaot {

Density1D::Density1D(Grid1D grid, std::function<double(double)> pdf)
    : grid_(std::move(grid)), raw_(std::move(pdf)) {
  const std::size_t n = grid_.cells();
  cell_.resize(n);
  mass_ = 1.0;
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    cell_[k] = partial_left(k, grid_.edge_s(k + 1));
    if (!(cell_[k] >= 0.0) || !std::isfinite(cell_[k])) throw DomainError("Density1D: density must be finite and nonnegative");
    total += cell_[k];
  }
  if (!(total > 0.0) || !std::isfinite(total)) throw DomainError("Density1D: grid carries no mass");
  mass_ = total;
  for (double& c : cell_) c /= total;
  left_.assign(n + 1, 0.0);
  right_.assign(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) left_[k + 1] = left_[k] + cell_[k];
  for (std::size_t k = n; k-- > 0;) right_[k] = right_[k + 1] + cell_[k];
  rule_ = composite_rule(grid_, 10);
}

Density1D Density1D::of_model(const DensityModel& m, std::size_t cells) {
  return Density1D(m.grid(cells), [m](double x) { return m.pdf(x); });
}

Density1D Density1D::perturbed(const DensityModel& m, std::function<double(double)> g, double eps,
                               std::size_t cells) {
  const Grid1D grid = m.grid(cells);
  const Rule1D probe = composite_rule(grid, 10);
  for (double x : probe.x)
    if (1.0 + eps * g(x) < 0.0) throw DomainError("Density1D::perturbed: 1 + eps*g is negative on the grid");
  return Density1D(grid, [m, g = std::move(g), eps](double x) { return (1.0 + eps * g(x)) * m.pdf(x); });
}

double Density1D::partial_left(std::size_t k, double s) const {
  const double a = grid_.edge_s(k);
  if (s <= a) return 0.0;
  const auto& gl = gauss_legendre(10);
  const double half = 0.5 * (s - a), mid = a + half;
  double acc = 0.0;
  for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
    const double t = mid + half * gl.nodes[q];
    acc += gl.weights[q] * raw_(grid_.x_of_s(t)) * grid_.dx_ds(t);
  }
  return half * acc / mass_;
}

double Density1D::partial_right(std::size_t k, double s) const {
  const double b = grid_.edge_s(k + 1);
  if (s >= b) return 0.0;
  const auto& gl = gauss_legendre(10);
  const double half = 0.5 * (b - s), mid = s + half;
  double acc = 0.0;
  for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
    const double t = mid + half * gl.nodes[q];
    acc += gl.weights[q] * raw_(grid_.x_of_s(t)) * grid_.dx_ds(t);
  }
  return half * acc / mass_;
}

double Density1D::cdf(double x) const {
  if (x <= grid_.x_lo()) return 0.0;
  if (x >= grid_.x_hi()) return 1.0;
  const std::size_t k = grid_.cell_of(x);
  return left_[k] + partial_left(k, grid_.s_of_x(x));
}

double Density1D::survival(double x) const {
  if (x <= grid_.x_lo()) return 1.0;
  if (x >= grid_.x_hi()) return 0.0;
  const std::size_t k = grid_.cell_of(x);
  return right_[k + 1] + partial_right(k, grid_.s_of_x(x));
}

double Density1D::solve_in_cell(std::size_t k, double target, bool from_left) const {
  double lo = grid_.edge_s(k), hi = grid_.edge_s(k + 1);
  const double frac = cell_[k] > 0.0 ? target / cell_[k] : 0.5;
  double s = from_left ? lo + frac * (hi - lo) : hi - frac * (hi - lo);
  s = std::clamp(s, lo, hi);
  for (int it = 0; it < 100; ++it) {
    // Residual as a nondecreasing function of s.
    const double r = from_left ? partial_left(k, s) - target : target - partial_right(k, s);
    if (r == 0.0) break;
    if (r > 0.0) hi = s;
    else lo = s;
    const double slope = raw_(grid_.x_of_s(s)) * grid_.dx_ds(s) / mass_;
    double next = slope > 0.0 && std::isfinite(slope) ? s - r / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - s) <= 4e-16 * (1.0 + std::abs(s))) {
      s = next;
      break;
    }
    s = next;
    if (hi - lo <= 4e-16 * (1.0 + std::abs(s))) break;
  }
  return grid_.x_of_s(s);
}

double Density1D::quantile(double u) const {
  if (u <= 0.0) return grid_.x_lo();
  if (u >= 1.0) return grid_.x_hi();
  const std::size_t n = grid_.cells();
  auto it = std::upper_bound(left_.begin(), left_.end(), u);
  std::size_t k = static_cast<std::size_t>(std::distance(left_.begin(), it));
  k = std::clamp<std::size_t>(k, 1, n) - 1;
  while (k + 1 < n && cell_[k] == 0.0) ++k;
  const double target = std::clamp(u - left_[k], 0.0, cell_[k]);
  return solve_in_cell(k, target, true);
}

double Density1D::upper_quantile(double q) const {
  if (q >= 1.0) return grid_.x_lo();
  if (q <= 0.0) return grid_.x_hi();
  const std::size_t n = grid_.cells();
  // Largest k with right_[k] >= q; right_ is nonincreasing.
  std::size_t lo = 0, hi = n;  // right_[0] = 1 >= q, right_[n] = 0 < q
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (right_[mid] >= q) lo = mid;
    else hi = mid;
  }
  std::size_t k = lo;
  while (k > 0 && cell_[k] == 0.0) --k;
  const double target = std::clamp(q - right_[k + 1], 0.0, cell_[k]);
  return solve_in_cell(k, target, false);
}

double Density1D::expect(const std::function<double(double)>& f) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < rule_.x.size(); ++i) {
    const double p = pdf(rule_.x[i]);
    if (p != 0.0) acc += rule_.w[i] * f(rule_.x[i]) * p;
  }
  return acc;
}

}  // namespace kappaot
