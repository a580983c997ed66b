#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kappaot/numerics.hpp"

namespace kappaot {

/// Case One: kappa > 0, beta = 1/kappa, W concave on a bounded support.
/// Case Two: -1/n <= kappa < 0, beta = -1/kappa >= n, W convex on R^n.
enum class Case { One, Two };

class KappaParam {
 public:
  static KappaParam from_kappa(double kappa);
  static KappaParam case_one(double beta);
  static KappaParam case_two(double beta);

  double kappa() const { return kappa_; }
  double beta() const { return beta_; }
  Case regime() const { return case_; }
  /// Exponent applied to W in the density, 1/kappa.
  double exponent() const { return 1.0 / kappa_; }
  /// (kappa + 1) / (-kappa): beta + 1 with a minus sign in Case One, beta - 1 in Case Two.
  double cost_factor() const { return (kappa_ + 1.0) / (-kappa_); }

 private:
  KappaParam(double kappa, double beta, Case c) : kappa_(kappa), beta_(beta), case_(c) {}
  double kappa_;
  double beta_;
  Case case_;
};

enum class WKind { QuadraticBall, QuadraticCauchy, Custom };

/// User supplied W with analytic derivatives. `lo`/`hi` bound the region
/// used for quadrature and sampling (the support in Case One).
struct CustomW {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<Mat(const Vec&)> hessian;
  Vec lo;
  Vec hi;
  std::string label = "custom";
};

/// The potential W, times a positive scale lambda.
///
/// QuadraticBall:   W(x) = lambda (sigma^2 - |x|^2)
/// QuadraticCauchy: W(x) = lambda (1 + alpha |x|^2)
/// Custom:          W(x) = lambda * user(x)
///
/// The ball polynomial is returned unclipped; densities clip it at zero.
class WSpec {
 public:
  static WSpec ball(int dim, double sigma);
  static WSpec cauchy(int dim, double alpha = 1.0);
  /// Runs the finite-difference consistency gate (relative 1e-6) on
  /// `gate_points` random points of the bounding box.
  static WSpec custom(int dim, CustomW w, std::uint64_t gate_seed = 1, int gate_points = 64);

  WKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double sigma() const { return sigma_; }
  double alpha() const { return alpha_; }
  double scale() const { return scale_; }
  WSpec scaled(double factor) const;
  const CustomW* custom_w() const { return custom_.get(); }

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  Mat hessian(const Vec& x) const;

  // One-dimensional fast paths.
  double value(double x) const;
  double d1(double x) const;
  double d2(double x) const;

  /// Value from |x|^2 for the two radial families.
  double radial_value(double r2) const;
  bool is_radial() const { return kind_ != WKind::Custom; }

 private:
  WKind kind_ = WKind::QuadraticBall;
  int dim_ = 1;
  double sigma_ = 1.0;
  double alpha_ = 1.0;
  double scale_ = 1.0;
  std::shared_ptr<const CustomW> custom_;
};

/// rho_{kappa,W} = W^{1/kappa} / int W^{1/kappa}.
class DensityModel {
 public:
  DensityModel(KappaParam kp, WSpec w, double z, bool normalized, std::string id);

  const KappaParam& kp() const { return kp_; }
  const WSpec& w() const { return w_; }
  int dim() const { return w_.dim(); }
  /// Normalizing constant of the W the model was built from.
  double z() const { return z_; }
  bool normalized() const { return normalized_; }
  const std::string& id() const { return id_; }

  double pdf(const Vec& x) const;
  double pdf(double x) const;
  /// Density as a function of W's value (zero when W <= 0 in Case One).
  double pdf_from_w(double wval) const;
  bool in_support(const Vec& x) const;

  /// Box outside of which at most `tail` mass lies (exact support box in Case One).
  std::pair<Vec, Vec> bounding_box(double tail = 1e-6) const;
  /// Grid adapted to the model for the one-dimensional precision path.
  Grid1D grid(std::size_t cells) const;

 private:
  KappaParam kp_;
  WSpec w_;
  double z_;
  bool normalized_;
  double factor_;
  std::string id_;
};

/// Builds the model; with `rescale` the returned W is multiplied by Z^{-kappa}
/// so that int W^{1/kappa} = 1.
DensityModel normalize(const WSpec& w, const KappaParam& kp, bool rescale = true,
                       std::string id = {});

enum class Family { BallBeta, Cauchy };

/// C_{sigma,beta} (BallBeta) or C_beta (Cauchy) for W = 1 + |x|^2.
double closed_form_constant(Family family, int n, double beta, double sigma = 1.0);

/// Parses "ball:sigma=1,beta=2,n=1", "cauchy:beta=2,n=1[,alpha=..]" or
/// "custom:<file>" and returns the normalized model.
DensityModel model_from_id(const std::string& id);

struct DiscreteMeasure {
  enum class Kind { Grid, Cloud };
  int dim = 1;
  std::vector<Vec> points;
  std::vector<double> weights;
  Kind kind = Kind::Cloud;

  std::size_t size() const { return weights.size(); }
  /// Throws DomainError unless weights are nonnegative, sum to one within
  /// 1e-12 and points are pairwise distinct.
  void validate() const;
};

DiscreteMeasure make_measure(int dim, std::vector<Vec> points, std::vector<double> weights,
                             DiscreteMeasure::Kind kind = DiscreteMeasure::Kind::Cloud);

struct GridSpec {
  enum class Placement { Center, Barycenter };
  std::vector<std::size_t> cells;  // one entry per axis (a single entry is broadcast)
  Vec lo;                          // box; ignored on tangent axes
  Vec hi;
  bool tangent = false;            // tangent-mapped cells, no truncation
  double tangent_scale = 1.0;
  Placement placement = Placement::Center;
  double min_captured_mass = 1.0 - 1e-6;
};

struct Discretization {
  DiscreteMeasure measure;
  double captured_mass = 0.0;
};

/// Cell masses of `pdf` renormalized to one. Throws GridError when the
/// captured mass is below spec.min_captured_mass.
Discretization discretize(const std::function<double(const Vec&)>& pdf, int dim,
                          const GridSpec& spec);
Discretization discretize(const DensityModel& m, const GridSpec& spec);
/// Box grid covering all but `tail` mass of the model.
GridSpec default_grid_spec(const DensityModel& m, std::size_t cells_per_axis, double tail = 1e-6);

/// Deterministic samples. 1D uses inverse-CDF on a dense grid, radial
/// families in n >= 2 use the radial inverse CDF and a uniform direction.
std::vector<Vec> sample(const DensityModel& m, std::size_t count, std::uint64_t seed);

struct ConcavityWitness {
  Vec x;
  Vec y;
  double t = 0.0;
  double lhs = 0.0;  // p(tx + (1-t)y)
  double rhs = 0.0;  // kappa-mean of p(x), p(y)
};

struct ConcavityResult {
  bool ok = true;
  std::size_t trials = 0;
  std::optional<ConcavityWitness> witness;
};

/// Random check of p(tx+(1-t)y) >= (t p(x)^kappa + (1-t) p(y)^kappa)^{1/kappa}.
ConcavityResult midpoint_concavity_check(const DensityModel& m, std::size_t trials,
                                         std::uint64_t seed);

}  // namespace kappaot
