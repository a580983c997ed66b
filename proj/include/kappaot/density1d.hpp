#pragma once

#include <functional>
#include <vector>

#include "kappaot/measures.hpp"

namespace kappaot {

/// A one-dimensional probability density known through a callable on a
/// grid. Masses per cell come from GL-10, cumulative sums are kept from
/// both ends so tail probabilities keep their relative precision.
class Density1D {
 public:
  /// `pdf` need not be normalized; it is divided by its grid mass.
  Density1D(Grid1D grid, std::function<double(double)> pdf);

  static Density1D of_model(const DensityModel& m, std::size_t cells);
  /// (1 + eps g) rho_model on the model grid.
  static Density1D perturbed(const DensityModel& m, std::function<double(double)> g, double eps,
                             std::size_t cells);

  const Grid1D& grid() const { return grid_; }
  double raw_mass() const { return mass_; }

  double pdf(double x) const { return raw_(x) / mass_; }
  double cdf(double x) const;
  double survival(double x) const;
  /// Inverse of cdf, solved per cell by safeguarded Newton.
  double quantile(double u) const;
  /// Inverse of survival.
  double upper_quantile(double q) const;

  /// Composite GL-10 rule on the grid (integration against dx).
  const Rule1D& rule() const { return rule_; }
  /// int f rho dx.
  double expect(const std::function<double(double)>& f) const;

 private:
  double partial_left(std::size_t k, double s) const;   // mass of cell k left of s
  double partial_right(std::size_t k, double s) const;  // mass of cell k right of s
  double solve_in_cell(std::size_t k, double target, bool from_left) const;

  Grid1D grid_;
  std::function<double(double)> raw_;
  double mass_ = 1.0;
  std::vector<double> cell_;   // normalized cell masses
  std::vector<double> left_;   // left_[k]  = sum_{j<k} cell_[j]
  std::vector<double> right_;  // right_[k] = sum_{j>=k} cell_[j]
  Rule1D rule_;
};

}  // namespace kappaot
