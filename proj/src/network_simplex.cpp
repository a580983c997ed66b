// Primal network simplex for the dense transportation problem.
//
// Nodes: sources [0, m), sinks [m, m+n), root r = m+n. Real arcs i -> j carry
// the cost matrix; artificial arcs i -> r and r -> j cost big M and form the
// initial tree. With positive weights that tree is strongly feasible, and the
// Cunningham leaving rule keeps it so, which rules out cycling. The tree and
// potentials are rebuilt after each pivot (O(V)), pricing is block search.

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kappaot/transport.hpp"

namespace kappaot {

namespace {

class Simplex {
 public:
  Simplex(std::vector<double> a, std::vector<double> b, const std::vector<double>& cost,
          const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols, std::size_t ncols_full)
      : m_(a.size()), n_(b.size()), a_(std::move(a)), b_(std::move(b)) {
    cost_.resize(m_ * n_);
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < n_; ++j) cost_[i * n_ + j] = cost[rows[i] * ncols_full + cols[j]];
    double cmax = 0.0;
    for (double c : cost_) cmax = std::max(cmax, std::abs(c));
    cscale_ = cmax;
    big_m_ = (cmax + 1.0) * static_cast<double>(m_ + n_ + 1);
    eps_ = 1e-12 * (cmax + 1.0);

    root_ = m_ + n_;
    nodes_ = m_ + n_ + 1;
    real_ = m_ * n_;
    arcs_ = real_ + m_ + n_;
    flow_.assign(arcs_, 0.0);
    basis_.resize(m_ + n_);
    for (std::size_t i = 0; i < m_; ++i) {
      basis_[i] = real_ + i;
      flow_[real_ + i] = a_[i];
    }
    for (std::size_t j = 0; j < n_; ++j) {
      basis_[m_ + j] = real_ + m_ + j;
      flow_[real_ + m_ + j] = b_[j];
    }
    parent_.resize(nodes_);
    parc_.resize(nodes_);
    depth_.resize(nodes_);
    pot_.resize(nodes_);
    off_.resize(nodes_);
    in_basis_.assign(arcs_, 0);
    for (auto e : basis_) in_basis_[e] = 1;
    block_ = std::max<std::size_t>(static_cast<std::size_t>(std::sqrt(static_cast<double>(arcs_))), 16);
    rebuild();
  }

  void run() {
    const std::size_t limit = 1000 * arcs_ + 100000;
    while (true) {
      const std::size_t e = price();
      if (e == kNone) break;
      pivot(e);
      rebuild();
      if (++pivots_ > limit) throw Error("network simplex: pivot limit exceeded");
    }
  }

  std::size_t m_, n_;
  std::vector<double> a_, b_, cost_;
  std::vector<double> flow_;
  std::vector<double> pot_;
  double big_m_ = 0.0, eps_ = 0.0, cscale_ = 0.0;
  std::size_t pivots_ = 0;
  std::size_t real_ = 0;

  double arc_cost(std::size_t e) const { return e < real_ ? cost_[e] : big_m_; }
  std::size_t tail(std::size_t e) const {
    if (e < real_) return e / n_;
    if (e < real_ + m_) return e - real_;
    return root_;
  }
  std::size_t head(std::size_t e) const {
    if (e < real_) return m_ + e % n_;
    if (e < real_ + m_) return root_;
    return e - real_;  // = m + j
  }
  // Potentials are stored as pot + off * M so that differences inside one
  // subtree of the root never round against M.
  double reduced(std::size_t e) const {
    const std::size_t t = tail(e), h = head(e);
    const long k = off_[t] - off_[h] + (e < real_ ? 0 : 1);
    return (e < real_ ? cost_[e] : 0.0) + (pot_[t] - pot_[h]) + static_cast<double>(k) * big_m_;
  }
  double full_potential(std::size_t v) const { return pot_[v] + static_cast<double>(off_[v]) * big_m_; }
  std::vector<long> off_;

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  void rebuild() {
    // CSR adjacency of the basis tree.
    adj_start_.assign(nodes_ + 1, 0);
    for (auto e : basis_) {
      ++adj_start_[tail(e) + 1];
      ++adj_start_[head(e) + 1];
    }
    for (std::size_t v = 0; v < nodes_; ++v) adj_start_[v + 1] += adj_start_[v];
    adj_.resize(2 * basis_.size());
    fill_.assign(adj_start_.begin(), adj_start_.end() - 1);
    for (auto e : basis_) {
      adj_[fill_[tail(e)]++] = e;
      adj_[fill_[head(e)]++] = e;
    }
    queue_.clear();
    queue_.push_back(root_);
    parent_[root_] = kNone;
    parc_[root_] = kNone;
    depth_[root_] = 0;
    pot_[root_] = 0.0;
    off_[root_] = 0;
    seen_.assign(nodes_, 0);
    seen_[root_] = 1;
    for (std::size_t q = 0; q < queue_.size(); ++q) {
      const std::size_t u = queue_[q];
      for (std::size_t k = adj_start_[u]; k < adj_start_[u + 1]; ++k) {
        const std::size_t e = adj_[k];
        const std::size_t v = tail(e) == u ? head(e) : tail(e);
        if (seen_[v]) continue;
        seen_[v] = 1;
        parent_[v] = u;
        parc_[v] = e;
        depth_[v] = depth_[u] + 1;
        // Tree arcs have zero reduced cost: pot[head] = pot[tail] + cost.
        const bool down = head(e) == v;
        if (e < real_) {
          pot_[v] = down ? pot_[u] + cost_[e] : pot_[u] - cost_[e];
          off_[v] = off_[u];
        } else {
          pot_[v] = pot_[u];
          off_[v] = down ? off_[u] + 1 : off_[u] - 1;
        }
        queue_.push_back(v);
      }
    }
    if (queue_.size() != nodes_) throw Error("network simplex: basis is not a spanning tree");
  }

  std::size_t price() {
    std::size_t best = kNone;
    double best_rc = -eps_;
    std::size_t scanned = 0;
    while (scanned < arcs_) {
      const std::size_t stop = std::min(arcs_, scanned + block_);
      for (; scanned < stop; ++scanned) {
        const std::size_t e = next_;
        next_ = (next_ + 1 == arcs_) ? 0 : next_ + 1;
        if (in_basis_[e]) continue;
        const double rc = reduced(e);
        if (rc < best_rc) {
          best_rc = rc;
          best = e;
        }
      }
      if (best != kNone) return best;
    }
    return kNone;
  }

  // A tree arc stored at child v points up when its head is the parent.
  bool points_up(std::size_t v) const { return head(parc_[v]) == parent_[v]; }

  void pivot(std::size_t enter) {
    const std::size_t k = tail(enter), l = head(enter);
    // Apex.
    std::size_t u = k, w = l;
    while (u != w) {
      if (depth_[u] >= depth_[w]) u = parent_[u];
      else w = parent_[w];
    }
    const std::size_t apex = u;

    // Cycle orientation follows the entering arc: apex ~> k -> l ~> apex.
    // On the k side the cycle walks down, so arcs pointing up lose flow;
    // on the l side it walks up, so arcs pointing down lose flow.
    double delta = kInf;
    for (std::size_t v = k; v != apex; v = parent_[v])
      if (points_up(v)) delta = std::min(delta, flow_[parc_[v]]);
    for (std::size_t v = l; v != apex; v = parent_[v])
      if (!points_up(v)) delta = std::min(delta, flow_[parc_[v]]);
    if (delta == kInf) throw Error("network simplex: unbounded pivot");

    // Last blocking arc in cycle order: on the l side the one nearest the
    // apex, else on the k side the one nearest k.
    std::size_t leave = kNone;
    for (std::size_t v = l; v != apex; v = parent_[v])
      if (!points_up(v) && flow_[parc_[v]] == delta) leave = parc_[v];
    if (leave == kNone) {
      for (std::size_t v = k; v != apex; v = parent_[v])
        if (points_up(v) && flow_[parc_[v]] == delta) {
          leave = parc_[v];
          break;
        }
    }
    if (leave == kNone) throw Error("network simplex: no leaving arc");

    if (delta > 0.0) {
      for (std::size_t v = k; v != apex; v = parent_[v]) {
        const std::size_t e = parc_[v];
        if (points_up(v)) flow_[e] = (e == leave) ? 0.0 : flow_[e] - delta;
        else flow_[e] += delta;
      }
      for (std::size_t v = l; v != apex; v = parent_[v]) {
        const std::size_t e = parc_[v];
        if (points_up(v)) flow_[e] += delta;
        else flow_[e] = (e == leave) ? 0.0 : flow_[e] - delta;
      }
    }
    flow_[leave] = 0.0;
    flow_[enter] = delta;
    auto pos = std::find(basis_.begin(), basis_.end(), leave);
    *pos = enter;
    in_basis_[leave] = 0;
    in_basis_[enter] = 1;
  }

  std::size_t root_ = 0, nodes_ = 0, arcs_ = 0;
  std::vector<std::size_t> basis_;
  std::vector<char> in_basis_;
  std::vector<std::size_t> parent_, parc_, depth_;
  std::vector<std::size_t> adj_start_, adj_, fill_, queue_;
  std::vector<char> seen_;
  std::size_t block_ = 16, next_ = 0;
};

}  // namespace

TransportPlan solve_transportation(const std::vector<double>& a, const std::vector<double>& b,
                                   const std::vector<double>& cost) {
  const std::size_t m = a.size(), n = b.size();
  if (m == 0 || n == 0) throw DomainError("solve_transportation: empty marginal");
  if (cost.size() != m * n) throw DomainError("solve_transportation: cost matrix has the wrong size");
  double sa = 0.0, sb = 0.0;
  for (double v : a) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("solve_transportation: source weights must be finite and nonnegative");
    sa += v;
  }
  for (double v : b) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("solve_transportation: target weights must be finite and nonnegative");
    sb += v;
  }
  if (!(sa > 0.0) || std::abs(sa - sb) > 1e-12 * std::max(sa, sb))
    throw DomainError("solve_transportation: marginals have different total mass");
  for (double c : cost)
    if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("solve_transportation: costs must be finite and nonnegative");

  // Zero-weight atoms do not enter the LP.
  std::vector<std::size_t> rows, cols;
  std::vector<double> ra, cb;
  for (std::size_t i = 0; i < m; ++i)
    if (a[i] > 0.0) {
      rows.push_back(i);
      ra.push_back(a[i]);
    }
  for (std::size_t j = 0; j < n; ++j)
    if (b[j] > 0.0) {
      cols.push_back(j);
      cb.push_back(b[j]);
    }

  Simplex sx(ra, cb, cost, rows, cols, n);
  sx.run();

  TransportPlan plan;
  plan.rows = m;
  plan.cols = n;
  plan.pivots = sx.pivots_;
  const std::size_t mm = rows.size(), nn = cols.size();
  std::vector<double> row_sum(m, 0.0), col_sum(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < mm; ++i)
    for (std::size_t j = 0; j < nn; ++j) {
      const double x = sx.flow_[i * nn + j];
      if (x > 0.0) {
        plan.coupling.push_back({rows[i], cols[j], x});
        total += x * sx.cost_[i * nn + j];
        row_sum[rows[i]] += x;
        col_sum[cols[j]] += x;
      }
    }
  plan.total_cost = total;
  double err = 0.0;
  for (std::size_t i = 0; i < m; ++i) err = std::max(err, std::abs(row_sum[i] - a[i]));
  for (std::size_t j = 0; j < n; ++j) err = std::max(err, std::abs(col_sum[j] - b[j]));
  plan.marginal_error = err;
  if (err > 1e-10) throw Error("solve_transportation: marginals not reproduced (infeasible instance)");

  // Duals: f_i = -potential(i), g_j = potential(j). Filtered atoms get the
  // tightest feasible value.
  plan.f.assign(m, 0.0);
  plan.g.assign(n, 0.0);
  std::vector<char> has_f(m, 0), has_g(n, 0);
  double dual_local = 0.0, dual_big = 0.0;
  for (std::size_t i = 0; i < mm; ++i) {
    plan.f[rows[i]] = -sx.full_potential(i);
    has_f[rows[i]] = 1;
    dual_local -= ra[i] * sx.pot_[i];
    dual_big -= ra[i] * static_cast<double>(sx.off_[i]);
  }
  for (std::size_t j = 0; j < nn; ++j) {
    plan.g[cols[j]] = sx.full_potential(mm + j);
    has_g[cols[j]] = 1;
    dual_local += cb[j] * sx.pot_[mm + j];
    dual_big += cb[j] * static_cast<double>(sx.off_[mm + j]);
  }
  double min_rc = kInf;
  for (std::size_t e = 0; e < mm * nn; ++e) min_rc = std::min(min_rc, sx.reduced(e));
  for (std::size_t j = 0; j < n; ++j)
    if (!has_g[j]) {
      double v = kInf;
      for (std::size_t i = 0; i < m; ++i)
        if (has_f[i]) v = std::min(v, cost[i * n + j] - plan.f[i]);
      plan.g[j] = std::isfinite(v) ? v : 0.0;
    }
  for (std::size_t i = 0; i < m; ++i)
    if (!has_f[i]) {
      double v = kInf;
      for (std::size_t j = 0; j < n; ++j) v = std::min(v, cost[i * n + j] - plan.g[j]);
      plan.f[i] = v;
    }
  plan.min_reduced_cost = min_rc;
  plan.dual_gap = total - (dual_local + dual_big * sx.big_m_);
  return plan;
}

Mat TransportPlan::dense() const {
  Mat out = Mat::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (const auto& t : coupling) out(static_cast<Eigen::Index>(t.i), static_cast<Eigen::Index>(t.j)) += t.mass;
  return out;
}

}  // namespace kappaot
