#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "kappaot/density1d.hpp"
#include "kappaot/functionals.hpp"
#include "kappaot/measures.hpp"

namespace kappaot {

struct Triplet {
  std::size_t i = 0;
  std::size_t j = 0;
  double mass = 0.0;
};

/// Result of the transportation LP. Duals satisfy f_i + g_j <= C_ij up to
/// `min_reduced_cost`, and sum a f + sum b g = total_cost - dual_gap.
struct TransportPlan {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Triplet> coupling;
  double total_cost = 0.0;
  double dual_gap = 0.0;
  double min_reduced_cost = 0.0;
  double marginal_error = 0.0;
  std::vector<double> f;  // source potentials
  std::vector<double> g;  // target potentials
  std::size_t pivots = 0;

  Mat dense() const;
};

/// Exact transportation LP by primal network simplex. `cost` is row-major
/// rows x cols; weights must be nonnegative with equal totals (1e-12).
TransportPlan solve_transportation(const std::vector<double>& a, const std::vector<double>& b,
                                   const std::vector<double>& cost);

TransportPlan solve_discrete_ot(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Mat& cost);
TransportPlan solve_discrete_ot(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                const std::function<double(const Vec&, const Vec&)>& cost);

/// Sparse (i, j, mass) triplets with a header line.
void write_plan_csv(const TransportPlan& plan, std::ostream& out);

/// Monotone rearrangement T = G^{-1} o F on the source grid nodes.
struct MonotoneMap1D {
  Grid1D grid;
  std::vector<double> x;
  std::vector<double> T;
  std::vector<double> theta_grad;  // T(x) - x
  std::vector<double> theta_hess;  // T'(x) - 1
};

MonotoneMap1D monotone_map_1d(const Density1D& src, const Density1D& tgt);

/// sup over interior nodes of |src(x) - tgt(T(x)) T'(x)|.
double ma_residual(const MonotoneMap1D& map, const Density1D& src, const Density1D& tgt);
/// sup over nodes of |G(T(x)) - F(x)|.
double pushforward_residual(const MonotoneMap1D& map, const Density1D& src, const Density1D& tgt);

/// Midpoint rule in the grid variable: int c(x, T(x)) src(x) dx.
double transport_cost_along_map(const MonotoneMap1D& map, const Density1D& src,
                                const std::function<double(double, double)>& cost);

/// W_p^p by the LP.
double wasserstein_p(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p);
/// W_p^p by the 1D quantile formula on discrete measures (exact for atoms).
double wasserstein_p_quantile(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p);
/// Quantile coupling value int_0^1 c(F^{-1}(u), G^{-1}(u)) du for 1D atoms.
double quantile_coupling_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                              const std::function<double(double, double)>& cost);

}  // namespace kappaot
