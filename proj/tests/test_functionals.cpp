#include "doctest.h"
#include "kappaot/functionals.hpp"
#include "kappaot/inequalities.hpp"
#include "oracles.hpp"

using namespace kappaot;

TEST_CASE("F") {
  CHECK(F(0.0) == 0.0);
  CHECK(F(1.0) == doctest::Approx(1.0 - std::log(2.0)));
  CHECK_THROWS(F(-0.1));
  for (int k = 0; k <= 100000; ++k) {
    const double t = 100.0 * k / 100000.0;
    const double mn = std::min(t, t * t);
    CHECK_UNARY(F(t) >= 0.25 * mn - 1e-15);
    CHECK_UNARY(F(t) <= mn + 1e-15);
  }
}

TEST_CASE("costs") {
  const DensityModel c2 = normalize(WSpec::cauchy(1), KappaParam::case_two(2.0), false, "c");
  const CostSpec cs(c2.kp(), c2.w());
  CHECK(cost_c(0.7, 0.7, cs) == 0.0);
  CHECK(cost_c(0.3, -1.2, cs) == doctest::Approx(1.5 * 1.5));
  const DensityModel b1 = normalize(WSpec::ball(1, 1.0), KappaParam::case_one(1.0), false, "b");
  const CostSpec bs(b1.kp(), b1.w());
  CHECK(cost_c(0.2, -0.4, bs) == doctest::Approx(2.0 * 0.36));

  // Generic Bregman form against a finite-difference gradient.
  oracle::Gen gen(3);
  const DensityModel c3 = model_from_id("cauchy:beta=3,n=2");
  const CostSpec s3(c3.kp(), c3.w());
  for (int k = 0; k < 50; ++k) {
    Vec x(2), y(2);
    x << gen.uniform(-3, 3), gen.uniform(-3, 3);
    y << gen.uniform(-3, 3), gen.uniform(-3, 3);
    const double hstep = 1e-6;
    Vec grad(2);
    for (int d = 0; d < 2; ++d) {
      Vec e = Vec::Zero(2);
      e[d] = hstep;
      grad[d] = (c3.w().value(Vec(x + e)) - c3.w().value(Vec(x - e))) / (2 * hstep);
    }
    const double ref = 2.0 * (c3.w().value(y) - c3.w().value(x) - grad.dot(y - x));
    CHECK(cost_c(x, y, s3) == doctest::Approx(ref).epsilon(1e-7));
    CHECK_UNARY(cost_c(x, y, s3) >= 0.0);
  }

  CostSpec t1(b1.kp(), b1.w(), 1.0, 1.0);
  CHECK(cost_tilde(0.0, 1.0, t1) == doctest::Approx(1.0 - std::log(2.0)));
  CHECK(cost_tilde(0.4, 0.4, t1) == 0.0);
  const DensityModel cn = normalize(WSpec::cauchy(1), KappaParam::case_two(1.0), false, "cn");
  CostSpec tn(cn.kp(), cn.w(), 0.3, 5.0);
  CHECK(cost_tilde(-2.0, 3.0, tn) == 0.0);
  CostSpec comb(c2.kp(), c2.w(), 0.3, 2.0, true);
  CHECK(cost(0.1, 0.9, comb) == doctest::Approx(cost_c(0.1, 0.9, comb) + cost_tilde(0.1, 0.9, comb)));
}

TEST_CASE("matrix functional examples") {
  CHECK(G_kappa(2.0, -0.5) == doctest::Approx(3.0 - 2.0 * std::sqrt(2.0)));
  const SymmetricMatrixSample I = SymmetricMatrixSample::from_matrix(Mat::Identity(3, 3), MatrixDomain::EigGtMinusOne);
  CHECK(std::abs(G_kappa(I, 0.5)) < 1e-15);
  CHECK(std::abs(G_kappa(I, -0.25)) < 1e-15);
  const SymmetricMatrixSample two = SymmetricMatrixSample::from_matrix(Mat::Constant(1, 1, 2.0), MatrixDomain::EigGtMinusOne);
  const BoundResult r = lemma_case1_bound(two, 1.0);
  CHECK(r.lhs == doctest::Approx(0.5));  // 1/2 - 1 + (2 - 1)
  CHECK(r.rhs == doctest::Approx(0.3));
  CHECK(lemma_case1_bound(two, 2.0).lhs == doctest::Approx(std::sqrt(2.0) - 1.0));  // 2 / sqrt 2 - 2 + 1
  CHECK(scalar_log_bound(1.0) == doctest::Approx(0.7 - std::log(2.0)));
  CHECK(scalar_log_bound(0.0) == 0.0);
  CHECK(log_quadratic_bound(2.0, 1.0) == doctest::Approx(1.0 - 0.125 - std::log(2.0)));
  CHECK(log_quadratic_bound(3.0, 3.0) == doctest::Approx(0.0));
  const SymmetricMatrixSample sing =
      SymmetricMatrixSample::from_matrix(Mat::Zero(2, 2), MatrixDomain::Nonnegative);
  CHECK_THROWS_AS(G_kappa(sing, 0.5), DomainError);
  CHECK(G_kappa(sing, -0.5) == doctest::Approx(2.0 - 2.0));
}

TEST_CASE("G_kappa agrees with a direct determinant formula") {
  oracle::Gen gen(17);
  Rng rng(17);
  for (int k = 0; k < 200; ++k) {
    const int n = gen.integer(1, 5);
    const SymmetricMatrixSample s = random_symmetric(n, MatrixDomain::EigGtMinusOne, rng);
    for (double kappa : {0.5, -1.0 / (n + 1.0)}) {
      const double det = s.M.determinant();
      const double ref = std::pow(det, -kappa) / kappa - 1.0 / kappa + (s.M.trace() - n);
      CHECK(G_kappa(s, kappa) == doctest::Approx(ref).epsilon(1e-8).scale(1.0));
      CHECK_UNARY(G_kappa(s, kappa) >= -1e-12);
    }
  }
}

TEST_CASE("random symmetric samples reconstruct and respect their domain") {
  Rng rng(4);
  for (int k = 0; k < 300; ++k) {
    const int n = 1 + k % 5;
    const MatrixDomain dom = k % 2 ? MatrixDomain::Nonnegative : MatrixDomain::EigGtMinusOne;
    const SymmetricMatrixSample s = random_symmetric(n, dom, rng);
    const Mat back = s.Q * s.lambda.asDiagonal() * s.Q.transpose();
    CHECK((back - s.M).norm() <= 1e-10 * (1.0 + s.M.norm()));
    for (int i = 0; i < n; ++i) {
      if (dom == MatrixDomain::EigGtMinusOne) CHECK_UNARY(s.lambda[i] > 0.0);
      else CHECK_UNARY(s.lambda[i] >= 0.0);
      CHECK(s.mu[i] == doctest::Approx(s.lambda[i] - 1.0));
    }
  }
}

TEST_CASE("lemma bounds on random samples") {
  Rng rng(99);
  for (int k = 0; k < 2000; ++k) {
    const int n = 1 + k % 5;
    CHECK_UNARY(lemma_case1_bound(random_symmetric(n, MatrixDomain::EigGtMinusOne, rng), 2.0).margin >= -1e-12);
    CHECK_UNARY(lemma_case2_bound(random_symmetric(n, MatrixDomain::Nonnegative, rng), 2.0 * n).margin >= -1e-12);
  }
  const SymmetricMatrixSample m = SymmetricMatrixSample::from_matrix(Mat::Constant(1, 1, 3.0), MatrixDomain::Nonnegative);
  CHECK(lemma_case2_bound(m, 1.0).rhs == 0.0);
  CHECK_THROWS_AS(lemma_case2_bound(SymmetricMatrixSample::from_matrix(Mat::Identity(3, 3), MatrixDomain::Nonnegative), 2.0),
                  DomainError);
}

TEST_CASE("trace and sphere bounds") {
  const BoundResult one = trace_F_sphere_bound(Mat::Constant(1, 1, 0.8));
  CHECK(one.margin == doctest::Approx(7.0 / 8.0 * F(0.8)));
  const BoundResult zero = trace_F_sphere_bound(Mat::Zero(2, 2));
  CHECK(zero.lhs == 0.0);
  CHECK(zero.rhs == doctest::Approx(0.0));
  CHECK(sphere_norm_constant(1) == doctest::Approx(1.0));
  CHECK(sphere_norm_constant(2) == doctest::Approx(2.0 / std::numbers::pi));
  CHECK(sphere_norm_constant(3) == doctest::Approx(0.5));
  const SphereEnvelope e = sphere_norm_envelope(200);
  CHECK(e.upper == doctest::Approx(1.0));
  CHECK(e.lower > std::sqrt(2.0 / std::numbers::pi) - 1e-3);
}

TEST_CASE("relative entropy") {
  const DensityModel m = model_from_id("cauchy:beta=2,n=1");
  CHECK(std::abs(relative_entropy(Density1D::of_model(m, 4096), m)) < 1e-12);

  // Oracle: Simpson on the pointwise integrand with the perturbed density
  // normalized by Simpson as well.
  const PerturbationSpec p = make_perturbation(m, "ratio", 0.1);
  const double kappa = m.kp().kappa();
  auto rho_raw = [&](double x) { return (1.0 + 0.1 * p.g(x)) * m.pdf(x); };
  const double mass = oracle::simpson_line(rho_raw, 200000);
  const double ref = oracle::simpson_line(
      [&](double x) { return relative_entropy_density(rho_raw(x) / mass, m.pdf(x), kappa); }, 200000);
  CHECK(relative_entropy(Density1D::perturbed(m, p.g, 0.1, 4096), m) == doctest::Approx(ref).epsilon(1e-6));

  // Nonnegativity on random perturbations.
  oracle::Gen gen(5);
  const char* models[] = {"cauchy:beta=2,n=1", "cauchy:beta=5,n=1", "ball:sigma=1,beta=1,n=1", "ball:sigma=2,beta=3,n=1"};
  for (int k = 0; k < 100; ++k) {
    const DensityModel mk = model_from_id(models[gen.integer(0, 3)]);
    const std::string kind = perturbation_kinds()[gen.integer(0, 3)];
    const double eps = gen.uniform(0.0, 0.3);
    const PerturbationSpec q = make_perturbation(mk, kind, eps);
    CHECK_UNARY(relative_entropy(Density1D::perturbed(mk, q.g, eps, 1024), mk) >= -1e-9);
  }
}

TEST_CASE("Case One entropy in beta form") {
  const DensityModel m = model_from_id("ball:sigma=1,beta=2,n=1");
  const PerturbationSpec p = make_perturbation(m, "bump", 0.2);
  const Density1D rho = Density1D::perturbed(m, p.g, 0.2, 4096);
  const double beta = 2.0;
  auto w = [&](double x) { return std::max(0.0, m.w().value(x)); };
  const double ref = oracle::simpson(
      [&](double x) {
        const double r = rho.pdf(x);
        return beta * std::pow(r, 1.0 + 1.0 / beta) - (beta + 1.0) * r * w(x) + std::pow(w(x), beta + 1.0);
      },
      -1.0, 1.0, 200000);
  CHECK(relative_entropy(rho, m) == doctest::Approx(ref).epsilon(1e-8));
}
