#include "doctest.h"
#include "kappaot/numerics.hpp"
#include "oracles.hpp"

using namespace kappaot;

TEST_CASE("adaptive integration against closed forms") {
  CHECK(integrate([](double x) { return std::exp(-x * x); }, -kInf, kInf) ==
        doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-12));
  CHECK(integrate([](double x) { return 1.0 / (1.0 + x * x); }, -kInf, kInf) ==
        doctest::Approx(std::numbers::pi).epsilon(1e-10));
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(integrate([](double x) { return std::sqrt(1.0 - x * x); }, -1.0, 1.0) ==
        doctest::Approx(std::numbers::pi / 2).epsilon(1e-9));
}

TEST_CASE("Gauss-Legendre rules integrate polynomials exactly") {
  for (int order : {2, 4, 6, 8, 10, 20}) {
    const GaussRule& r = gauss_legendre(order);
    for (int p = 0; p < 2 * order; ++p) {
      double s = 0.0;
      for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], p);
      const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
      CHECK(s == doctest::Approx(exact).epsilon(1e-13));
    }
  }
}

TEST_CASE("grid maps round trip") {
  const Grid1D lin = Grid1D::linear(-2.0, 3.0, 100);
  const Grid1D tan = Grid1D::tangent(0.5, 2.0, 100);
  for (double x : {-1.9, 0.0, 1.234, 2.9}) {
    CHECK(lin.x_of_s(lin.s_of_x(x)) == doctest::Approx(x).epsilon(1e-14));
    CHECK(tan.x_of_s(tan.s_of_x(x)) == doctest::Approx(x).epsilon(1e-14));
  }
  CHECK(std::isinf(tan.x_lo()));
  // cells are uniform in s = 1/2 + atan((x - c)/scale)/pi
  CHECK(tan.cell_of(0.5 + 2.0 * std::tan(std::numbers::pi * 0.005)) == 50);
  CHECK(tan.cell_of(0.5 - 2.0 * std::tan(std::numbers::pi * 0.005)) == 49);
  CHECK(tan.cell_of(0.5 + 2.0 * std::tan(std::numbers::pi * 0.475)) == 97);
  const Rule1D r = composite_rule(tan, 8);
  double s = 0.0;
  for (std::size_t i = 0; i < r.x.size(); ++i) s += r.w[i] / (1.0 + r.x[i] * r.x[i]);
  CHECK(s == doctest::Approx(oracle::simpson_line([](double x) { return 1.0 / (1.0 + x * x); })).epsilon(1e-8));
}

TEST_CASE("Cauchy radial moment against Simpson") {
  for (double p : {0.0, 1.0, 2.5}) {
    for (double beta : {2.5, 4.0}) {
      // r = tan u, u = (pi/2)(1 - w^2) smooths the endpoint at r = inf.
      const double ref = oracle::simpson(
          [&](double w) {
            const double u = 0.5 * std::numbers::pi * (1.0 - w * w);
            const double c = std::cos(u), r = std::tan(u);
            if (c <= 0.0) return 0.0;
            return std::pow(r, p) * std::pow(1.0 + r * r, -beta) / (c * c) * std::numbers::pi * w;
          },
          0.0, 1.0);
      CHECK(cauchy_radial_moment(p, beta) == doctest::Approx(ref).epsilon(1e-8));
    }
  }
  CHECK_THROWS_AS(cauchy_radial_moment(3.0, 1.5), DivergenceError);
}

TEST_CASE("sphere area") {
  CHECK(std::exp(log_sphere_area(1)) == doctest::Approx(2.0));
  CHECK(std::exp(log_sphere_area(2)) == doctest::Approx(2.0 * std::numbers::pi));
  CHECK(std::exp(log_sphere_area(3)) == doctest::Approx(4.0 * std::numbers::pi));
}

TEST_CASE("Richardson removes the leading error terms") {
  // a(h) = 1 + 3h + 5h^2 at h = 1, 1/2, 1/4.
  std::vector<double> v;
  for (double h : {1.0, 0.5, 0.25}) v.push_back(1.0 + 3.0 * h + 5.0 * h * h);
  CHECK(richardson(v, 2) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("Rng streams depend only on the seed") {
  Rng a(5), b(5), c(6);
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  CHECK(a.uniform() != c.uniform());
  Rng n(9);
  double m = 0.0, v = 0.0;
  const int N = 200000;
  for (int i = 0; i < N; ++i) {
    const double z = n.normal();
    m += z;
    v += z * z;
  }
  CHECK(std::abs(m / N) < 0.01);
  CHECK(std::abs(v / N - 1.0) < 0.01);
}
