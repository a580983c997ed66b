#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "kappaot/density1d.hpp"
#include "kappaot/functionals.hpp"
#include "kappaot/measures.hpp"
#include "kappaot/poincare.hpp"
#include "kappaot/transport.hpp"

namespace kappaot {

// ---------------------------------------------------------------------------
// Perturbations rho = (1 + eps g) rho_model

/// Direction g on the line with its derivative. Raw shapes live in t = x/L
/// (L = model_length): bump exp(-(t-0.7)^2/0.5), odd sin(2t) e^{-t^2/2},
/// even (t^2 - 1) e^{-t^2/2}, ratio t/(1+t^2), zero. Moments are removed by
/// subtracting multiples of q0 = e^{-t^2/2} (mass) and q1 = t e^{-t^2/2}
/// (centre of mass); the result is scaled to sup |g| = 1.
struct PerturbationSpec {
  std::string kind;
  std::function<double(double)> g;
  std::function<double(double)> dg;
  double epsilon = 0.0;
  bool match_center_of_mass = false;
  double mass_moment = 0.0;    // int g rho_model
  double center_moment = 0.0;  // int x g rho_model
};

const std::vector<std::string>& perturbation_kinds();
PerturbationSpec make_perturbation(const DensityModel& m, const std::string& kind, double eps,
                                   bool match_center_of_mass = false);

/// Perturbation for n >= 2 with mass correction only; g depends on x_1 and |x|.
struct PerturbationND {
  std::string kind;
  std::function<double(const Vec&)> g;
  double epsilon = 0.0;
  double mass_moment = 0.0;
};
PerturbationND make_perturbation_nd(const DensityModel& m, const std::string& kind, double eps);

// ---------------------------------------------------------------------------
// Cases

struct InequalityCase {
  std::string suite;
  std::string case_id;
  std::string model;
  std::string params;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  double tol = 0.0;
  bool pass = false;
  std::uint64_t seed = 0;
  std::string note;
  double runtime = 0.0;  // seconds, filled by the suite runner
};

/// margin = lhs - rhs, pass = margin >= -tol.
void settle(InequalityCase& c);

/// 1D: relative entropy against the cost of the monotone map on `cells` grid cells.
InequalityCase verify_thm1(const DensityModel& m, const PerturbationSpec& p, std::size_t cells = 4096,
                           double tol = 1e-6);
/// n = 2: exact LP between Knothe quantile clouds with `cells`^2 atoms each.
InequalityCase verify_thm1(const DensityModel& m, const PerturbationND& p, std::size_t cells = 40,
                           double tol = 1e-3);

/// Equal-weight cloud at the Knothe quantiles ((i+1/2)/N, (j+1/2)/N) of `pdf`
/// (x_1 marginal, then x_2 given x_1). Built-in families, n = 2.
DiscreteMeasure knothe_cloud(const DensityModel& m, const std::function<double(const Vec&)>& pdf,
                             std::size_t per_axis);

struct Decomposition {
  double entropy = 0.0;       // relative entropy
  double transport = 0.0;     // int c(x, T x) rho_model
  double hessian_term = 0.0;  // int W G_kappa(1 + theta'') rho_model
  double residual = 0.0;
};
Decomposition decomposition_check(const DensityModel& m, const PerturbationSpec& p, std::size_t cells);

struct DecompositionStudy {
  Decomposition coarse;  // at cells
  Decomposition fine;    // at 2 cells
  double ratio = 0.0;    // fine / coarse residual
  bool pass = false;     // coarse <= tol and ratio <= 0.6 (or both below 1e-12)
};
DecompositionStudy decomposition_study(const DensityModel& m, const PerturbationSpec& p, std::size_t cells = 4096,
                                       double tol = 1e-4);

/// Extra diagnostics of the cost-strengthened theorems.
struct QuantitativeCase {
  InequalityCase result;
  double rhs_plain = 0.0;   // plain entropy-transport right side on the same pair
  double rhs_half_h = 0.0;  // right side with h/2
};

/// Case One with the c-tilde cost. Refuses (DomainError) unless `h` is
/// validated and the perturbation matches the centre of mass.
QuantitativeCase verify_thm2(const DensityModel& m, const PerturbationSpec& p, const PoincareEstimate& h,
                             std::size_t cells = 4096, double c = kTildeConstant, double tol = 1e-6);
/// Case Two analogue with prefactor (c/beta)(1 - n/beta)^2.
QuantitativeCase verify_thm3(const DensityModel& m, const PerturbationSpec& p, const PoincareEstimate& h,
                             std::size_t cells = 4096, double c = kTildeConstant, double tol = 1e-6);

/// lhs = H - W_c, rhs = W_{c-tilde}.
InequalityCase remainder_check(const DensityModel& m, const PerturbationSpec& p, const PoincareEstimate& h,
                               std::size_t cells = 4096, double c = kTildeConstant, double tol = 1e-6);

struct Linearization {
  std::vector<double> eps;
  std::vector<double> ratios;  // H / eps^2
  double extrapolated = 0.0;
  double target = 0.0;         // ((kappa+1)/2) int g^2 rho^{1+kappa}
  double rel_error = 0.0;
  bool monotone = true;        // |ratio - target| decreasing, one exception allowed
};
Linearization entropy_linearization(const DensityModel& m, const PerturbationSpec& g,
                                    const std::vector<double>& eps_list = {0.1, 0.05, 0.025, 0.0125},
                                    std::size_t cells = 4096);

struct TransportLinearization {
  std::vector<double> eps;
  std::vector<double> ratios;  // W_c / eps^2
  double extrapolated = 0.0;
  double lower_bound = 0.0;    // (1/2)(int g f rho)^2 / int f'^2 / H rho
  bool holds = false;          // extrapolated >= lower_bound - tol (the eps -> 0 limit)
};
/// `f`, `df` default to f = g W.
TransportLinearization transport_linearization_lb(const DensityModel& m, const PerturbationSpec& g,
                                                  std::function<double(double)> f = {},
                                                  std::function<double(double)> df = {},
                                                  const std::vector<double>& eps_list = {0.1, 0.05, 0.025, 0.0125},
                                                  std::size_t cells = 4096, double tol = 1e-6);

// ---------------------------------------------------------------------------
// Brascamp-Lieb, 1D

/// Polynomial in t = x/L.
struct PolyG {
  std::vector<double> coeffs;  // ascending powers of t
  double length = 1.0;
  int degree = 0;

  double value(double x) const;
  double derivative(double x) const;
};

/// t^k made orthogonal to {1} (or {1, t}) in L^2(rho_model), unit L^2 norm.
/// Throws DivergenceError when a needed moment is infinite.
PolyG orthogonal_polynomial(const DensityModel& m, int degree, bool against_linear);

/// Polynomial g of this degree has both sides finite.
bool bl_integrable(const DensityModel& m, int degree);

/// lhs = int f'^2 / |W''| rho with f = g W, rhs = beta int g^2 W rho.
/// Non-integrable g (degree >= 0 given, or detected in the tails) gives
/// lhs = rhs = inf and margin = the smallest truncated margin over
/// R in {10, 100, 1000} L; pass requires those to be >= -tol and increasing.
InequalityCase verify_bl(const DensityModel& m, const std::function<double(double)>& g,
                         const std::function<double(double)>& dg, int degree = -1, double tol = 1e-9);

struct QuantitativeBL {
  InequalityCase result;
  double lhs_plain = 0.0;  // without the shift
  double shift = 0.0;
};
/// |W''| + shift in the denominator, shift = (c/(beta+1)) h or
/// (c/(beta(beta-1)))(1 - n/beta)^2 h. Rejects g unless int g rho and
/// int x g rho vanish (1e-10) and h is validated.
QuantitativeBL verify_bl_quant(const DensityModel& m, const std::function<double(double)>& g,
                               const std::function<double(double)>& dg, const PoincareEstimate& h,
                               double c = kTildeConstant, double tol = 1e-9);

}  // namespace kappaot
