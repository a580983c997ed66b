#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace kappaot {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameter outside the admissible range of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An integral required by the operation is infinite.
class DivergenceError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A discretization does not resolve the measure to the requested accuracy.
class GridError : public Error {
 public:
  using Error::Error;
};

/// Deterministic random source. Uniforms are built from raw 64-bit draws so
/// the stream only depends on the engine, not on the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Open interval (0,1), never returns 0.
  double uniform_open() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }
  double normal();
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Adaptive Gauss-Kronrod integration; infinite limits are allowed.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-13, unsigned max_depth = 15);

/// Fixed Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre(int order);

/// Uniform grid in a computational variable s, mapped to x.
///
/// Linear:  s in [0, 1],        x = lo + (hi - lo) s.
/// Tangent: s in (-pi/2, pi/2), x = center + scale tan(s).
///
/// Nodes sit at cell centres, so a tangent grid never touches s = +-pi/2.
class Grid1D {
 public:
  enum class Map { Linear, Tangent };

  static Grid1D linear(double lo, double hi, std::size_t cells);
  static Grid1D tangent(double center, double scale, std::size_t cells);

  Map map() const { return map_; }
  std::size_t cells() const { return cells_; }
  double h() const { return h_; }
  double s_lo() const { return s_lo_; }
  double s_hi() const { return s_hi_; }

  double x_of_s(double s) const;
  double dx_ds(double s) const;
  double s_of_x(double x) const;

  double node_s(std::size_t i) const { return s_lo_ + (static_cast<double>(i) + 0.5) * h_; }
  double node(std::size_t i) const { return x_of_s(node_s(i)); }
  double jacobian(std::size_t i) const { return dx_ds(node_s(i)); }
  double edge_s(std::size_t k) const { return s_lo_ + static_cast<double>(k) * h_; }
  /// Edge position; infinite at the ends of a tangent grid.
  double edge(std::size_t k) const;
  double x_lo() const { return edge(0); }
  double x_hi() const { return edge(cells_); }
  /// Cell index containing x (clamped).
  std::size_t cell_of(double x) const;

  Grid1D refined(std::size_t factor) const;

 private:
  Map map_ = Map::Linear;
  double a_ = 0.0, b_ = 1.0;  // lo/hi (Linear) or center/scale (Tangent)
  double s_lo_ = 0.0, s_hi_ = 1.0, h_ = 1.0;
  std::size_t cells_ = 1;
};

/// Weighted nodes approximating integration against dx.
struct Rule1D {
  std::vector<double> x;
  std::vector<double> w;
};

/// Composite Gauss-Legendre rule over every cell of the grid (in s).
Rule1D composite_rule(const Grid1D& grid, int order = 8);

/// Composite GL integral of f(x) dx over [lo, hi] with `pieces` equal parts.
double integrate_gl(const std::function<double(double)>& f, double lo, double hi,
                    int pieces = 1, int order = 10);

/// Flat tensor-product rule in dimension n built from per-axis rules.
struct TensorRule {
  int dim = 1;
  std::vector<double> points;  // row-major, dim entries per node
  std::vector<double> weights;
  std::size_t size() const { return weights.size(); }
  const double* point(std::size_t k) const { return points.data() + k * static_cast<std::size_t>(dim); }
};
TensorRule tensor_rule(const Rule1D& axis, int dim);
TensorRule tensor_rule(const std::vector<Rule1D>& axes);

/// Log of the surface area of the unit sphere S^{n-1}.
double log_sphere_area(int n);

/// Radial integral int_0^inf r^p (1 + alpha r^2)^{-beta} dr in closed form.
double cauchy_radial_moment(double p, double beta, double alpha = 1.0);

/// True when r^n |f(r e)| decreases at large r along every axis direction.
bool tail_integrable(const std::function<double(const Vec&)>& f, int dim);

/// Richardson extrapolation for a sequence at step ratio 2 with error
/// expansion in powers 1, 2, ... of the step.
double richardson(const std::vector<double>& values, int levels);

}  // namespace kappaot
