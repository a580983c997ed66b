#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kappaot/density1d.hpp"
#include "kappaot/functionals.hpp"
#include "kappaot/measures.hpp"

namespace kappaot {

/// Probability measure given by weighted nodes, with W sampled at each node
/// (all ones when W is irrelevant).
struct QuadMeasure {
  int dim = 1;
  std::vector<double> points;  // dim entries per node
  std::vector<double> weights;
  std::vector<double> wvals;

  std::size_t size() const { return weights.size(); }
  Vec point(std::size_t k) const {
    return Eigen::Map<const Vec>(points.data() + k * static_cast<std::size_t>(dim), dim);
  }
};

/// Tensor Gauss-Legendre nodes on the model grid (tangent axes in Case Two,
/// the support box in Case One). `cells_per_axis` = 0 picks a default.
QuadMeasure quadrature_measure(const DensityModel& m, std::size_t cells_per_axis = 0);
/// Nodes of a 1D density; W = 1.
QuadMeasure quadrature_measure(const Density1D& rho);

struct TestFunction {
  std::string name;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
};

/// Fixed 50-function family: 20 polynomial x Gaussian decay, 15 bumps,
/// 15 tents, all in the first coordinate scaled by `length`.
struct TestFamily {
  std::string version;
  std::uint64_t hash = 0;
  std::vector<TestFunction> functions;
};
TestFamily standard_family(int dim, double length);
/// Smoothed half-space indicators tanh((x_1 - a)/(width L)) for offsets
/// a/L in [-3, 3]; their L1 ratios approach the set-level Cheeger constant.
TestFamily step_family(int dim, double length, double width = 0.1);
/// Natural length of a model: sigma for the ball, 1/sqrt(alpha) for Cauchy.
double model_length(const DensityModel& m);

enum class CenterKind { Median, Mean };
const char* to_string(CenterKind c);

/// mu-median (interpolated) or mean of the values f_k.
double median_or_center(const std::vector<double>& values, const std::vector<double>& weights,
                        CenterKind kind = CenterKind::Median);
double median_or_center(const TestFunction& f, const QuadMeasure& mu, CenterKind kind = CenterKind::Median);

enum class PoincareMethod { CauchyChain, NumericalSearch, UserSupplied };
const char* to_string(PoincareMethod m);

struct FunctionMargin {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
};

struct PoincareEstimate {
  std::string model_id;
  double h = 0.0;
  bool validated = false;
  PoincareMethod method = PoincareMethod::UserSupplied;
  CenterKind center = CenterKind::Median;
  std::string family_version;
  std::uint64_t family_hash = 0;
  std::size_t family_size = 0;
  double worst_margin = 0.0;
  std::vector<FunctionMargin> margins;

  std::string to_json() const;
};

/// Checks int F(|grad f|) W dmu >= int F(h |f - m_f|) dmu on every f.
PoincareEstimate verify_weighted_poincare(const QuadMeasure& mu, double h, const TestFamily& family,
                                          CenterKind center = CenterKind::Median,
                                          PoincareMethod method = PoincareMethod::UserSupplied);

struct TransferMargin {
  std::string name;
  double hypothesis = 0.0;  // int |grad f / h| omega - int |f - m_f|
  double conclusion = 0.0;  // int F(omega |grad f| / h) - int F(|f - m_f|)
  bool implication_holds = true;
};
std::vector<TransferMargin> proposition1_transfer(const QuadMeasure& mu, const std::function<double(const Vec&)>& omega,
                                                  double h, const TestFamily& family,
                                                  CenterKind center = CenterKind::Median);

struct CheegerResult {
  std::vector<FunctionMargin> margins;  // lhs = int |f - m_f|, rhs = (C/2) int |grad f| omega
  std::vector<double> ratios;           // 2 int|f - m_f| / int |grad f| omega
  double minimal_constant = 0.0;        // max of ratios
  bool ok = true;                       // every margin >= 0 at the supplied C
};
CheegerResult cheeger_l1_check(const QuadMeasure& mu, const std::function<double(const Vec&)>& omega,
                               double c_kappa, const TestFamily& family, CenterKind center = CenterKind::Median);

struct GeometricMeanRadius {
  double m = 0.0;   // exp int log|x| dmu
  double m1 = 0.0;  // int |x| dmu
  std::vector<std::pair<double, double>> m_q;  // (q, (int |x|^q)^{1/q})
};
/// Radial quadrature for the Cauchy family (Case Two, built-in W).
GeometricMeanRadius geometric_mean_radius(const DensityModel& m, const std::vector<double>& qs = {0.5, 1.0, 1.5});
double geometric_mean_radius(const DiscreteMeasure& mu);

/// int_0^inf r^n (1 + r^2)^{-beta} dr.
struct LaplaceResult {
  double numeric = 0.0;
  double asymptotic = 0.0;
  double ratio = 0.0;
};
LaplaceResult laplace_In(int n, double beta);

struct CauchyBound {
  double h_raw = 0.0;   // for W = 1 + |x|^2
  double h = 0.0;       // for the normalized W = lambda (1 + |x|^2)
  double lambda = 1.0;
  double m = 0.0;
  double m1 = 0.0;
  double h_asymptotic = 0.0;  // with m replaced by C_env sqrt(n beta)
  double envelope = 0.0;      // C_env = max over a beta grid of m1 / sqrt(n beta)
};
CauchyBound cauchy_h_lower_bound(int n, double beta, double c_kappa);

/// omega(x) = m + |x| / (beta - n).
std::function<double(const Vec&)> cauchy_weight(double m, int n, double beta);

/// Largest h on a bisection grid that passes the family, then halved.
PoincareEstimate search_poincare_constant(const DensityModel& m, const QuadMeasure& mu, const TestFamily& family,
                                          CenterKind center = CenterKind::Median);

/// Cheeger constant (supplied, or the family minimum when c_kappa <= 0),
/// the explicit h bound for it, and the F-form check of that h.
struct ChainResult {
  double m = 0.0;
  double c_kappa = 0.0;
  CheegerResult cheeger;
  CauchyBound bound;
  PoincareEstimate estimate;
};
ChainResult cauchy_chain(const DensityModel& m, double c_kappa = 0.0, CenterKind center = CenterKind::Median);

}  // namespace kappaot
