#pragma once

#include <functional>
#include <optional>

#include "kappaot/density1d.hpp"
#include "kappaot/measures.hpp"

namespace kappaot {

/// Numerical constant in the quantitative spectral bounds.
inline constexpr double kTildeConstant = 0.3;

/// t - log(1 + t), t >= 0.
double F(double t);

struct CostSpec {
  CostSpec(KappaParam kp_, WSpec w_, double c_ = kTildeConstant, double h_ = 0.0, bool combined_ = false)
      : kp(kp_), w(std::move(w_)), c(c_), h(h_), combined(combined_) {}

  KappaParam kp;
  WSpec w;
  double c;
  double h;
  bool combined;

  /// c (Case One) or (c / beta)(1 - n/beta)^2 (Case Two).
  double tilde_prefactor() const;
};

/// Bregman cost ((kappa+1)/(-kappa)) [W(y) - W(x) - grad W(x).(y - x)].
double cost_c(const Vec& x, const Vec& y, const CostSpec& spec);
double cost_c(double x, double y, const CostSpec& spec);
/// prefactor * F(h |y - x|).
double cost_tilde(const Vec& x, const Vec& y, const CostSpec& spec);
double cost_tilde(double x, double y, const CostSpec& spec);
/// cost_c, plus cost_tilde when spec.combined.
double cost(const Vec& x, const Vec& y, const CostSpec& spec);
double cost(double x, double y, const CostSpec& spec);

/// (kappa,W)-entropy (1/kappa) int (rho^{1+kappa} - rho) + ((kappa+1)/(-kappa)) int rho W.
/// +inf when an integrand is not integrable at infinity.
double entropy_H(const Density1D& rho, const DensityModel& m);
double entropy_H(const std::function<double(const Vec&)>& rho, const TensorRule& rule,
                 const DensityModel& m);

/// Entropy relative to the (normalized) model, evaluated pointwise in the
/// stable form rho_m^{1+kappa} phi(rho / rho_m - 1). Always >= 0.
double relative_entropy(const Density1D& rho, const DensityModel& m);
double relative_entropy(const std::function<double(const Vec&)>& rho, const TensorRule& rule,
                        const DensityModel& m);
/// Pointwise integrand of relative_entropy given rho and rho_m.
double relative_entropy_density(double rho, double rho_m, double kappa);

enum class MatrixDomain { EigGtMinusOne, Nonnegative };

struct SymmetricMatrixSample {
  Mat M;
  Vec lambda;  // eigenvalues of M
  Vec mu;      // eigenvalues of M - I
  Mat Q;       // eigenvectors
  MatrixDomain domain = MatrixDomain::EigGtMinusOne;

  int dim() const { return static_cast<int>(M.rows()); }
  /// Eigendecomposition of a symmetric M; validates the domain tag.
  static SymmetricMatrixSample from_matrix(const Mat& M, MatrixDomain domain);
  /// Q diag(lambda) Q^T with Haar Q; validates reconstruction and domain.
  static SymmetricMatrixSample from_spectrum(const Mat& Q, const Vec& lambda, MatrixDomain domain);
};

/// Haar-orthogonal eigenbasis, log-normal spectrum at a random scale in
/// {0.01, 0.3, 3}; Nonnegative samples zero out eigenvalues with probability 0.1.
SymmetricMatrixSample random_symmetric(int n, MatrixDomain domain, Rng& rng);

/// (1/kappa) det(M)^{-kappa} - 1/kappa + tr(M - I).
double G_kappa(const SymmetricMatrixSample& s, double kappa);
/// Scalar version for 1x1 matrices (value t).
double G_kappa(double t, double kappa);

struct BoundResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  double std_error = 0.0;  // Monte Carlo error of rhs, 0 when exact
};

/// G_{1/beta}(M) >= c sum min(mu^2, |mu|).
BoundResult lemma_case1_bound(const SymmetricMatrixSample& s, double beta, double c = kTildeConstant);
/// t - c min(t^2, |t|) - log(1 + t).
double scalar_log_bound(double t, double c = kTildeConstant);
/// log t + (s - t)/t - (s - t)^2 / (2 max(s,t)^2) - log s.
double log_quadratic_bound(double s, double t);
/// G_{-1/beta}(M) >= (3/(64 beta)) (1 - n/beta)^2 F(|M - I|_HS).
BoundResult lemma_case2_bound(const SymmetricMatrixSample& s, double beta);
/// sum F(|lambda_i(M)|) >= (1/8) avg_{sphere} F(sqrt(n) |M u|).
BoundResult trace_F_sphere_bound(const Mat& M, std::uint64_t seed = 1, std::size_t mc_points = 10000);

/// int_{S^{n-1}} |e_1 . u| dsigma(u).
double sphere_norm_constant(int n);
struct SphereEnvelope {
  double lower = 0.0;  // min over n of c_n sqrt(n)
  double upper = 0.0;  // max over n of c_n sqrt(n)
};
SphereEnvelope sphere_norm_envelope(int n_max = 200);

}  // namespace kappaot
