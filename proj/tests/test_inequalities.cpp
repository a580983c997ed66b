#include "doctest.h"
#include "kappaot/inequalities.hpp"
#include "oracles.hpp"

using namespace kappaot;

namespace {

// Expectation against the model by Simpson (line or support).
double expect(const DensityModel& m, const std::function<double(double)>& f) {
  auto fr = [&](double x) { return f(x) * m.pdf(x); };
  if (m.kp().regime() == Case::Two) return oracle::simpson_line(fr, 100000);
  const double s = m.w().sigma();
  return oracle::simpson(fr, -s, s, 100000);
}

PoincareEstimate zero_h(const DensityModel& m) {
  return verify_weighted_poincare(quadrature_measure(m), 0.0, standard_family(1, model_length(m)));
}

}  // namespace

TEST_CASE("perturbations satisfy their moment constraints") {
  for (const char* id : {"cauchy:beta=2,n=1", "cauchy:beta=6,n=1", "ball:sigma=1,beta=1,n=1", "ball:sigma=2,beta=5,n=1"}) {
    const DensityModel m = model_from_id(id);
    for (const auto& kind : perturbation_kinds()) {
      for (bool center : {false, true}) {
        if (kind == "zero") continue;
        const PerturbationSpec p = make_perturbation(m, kind, 0.1, center);
        CHECK(std::abs(expect(m, p.g)) < 1e-9);
        if (center) CHECK(std::abs(expect(m, [&](double x) { return x * p.g(x); })) < 1e-9);
        double sup = 0.0;
        // on the support only; the scale is fixed at quadrature nodes, so
        // allow a little overshoot between them
        const double reach = m.kp().regime() == Case::Two ? 4.0 * model_length(m) : m.w().sigma();
        for (int k = -400; k <= 400; ++k) sup = std::max(sup, std::abs(p.g(k * reach / 400.0)));
        CHECK(sup <= 1.0 + 1e-4);
        // derivative by central differences
        for (double x : {-0.7, 0.1, 0.55}) {
          const double h = 1e-6;
          CHECK(p.dg(x) == doctest::Approx((p.g(x + h) - p.g(x - h)) / (2 * h)).epsilon(1e-6).scale(1.0));
        }
      }
    }
  }
  CHECK_THROWS_AS(make_perturbation(model_from_id("cauchy:beta=2,n=1"), "bump", 1.5), DomainError);
}

TEST_CASE("entropy dominates the transport cost on the line") {
  const DensityModel m = model_from_id("cauchy:beta=2,n=1");
  const InequalityCase z = verify_thm1(m, make_perturbation(m, "zero", 0.1));
  CHECK(std::abs(z.lhs) < 1e-14);
  CHECK(std::abs(z.rhs) < 1e-14);
  const InequalityCase c = verify_thm1(m, make_perturbation(m, "bump", 0.1));
  CHECK(c.pass);
  CHECK(c.margin > 0.0);
  CHECK(c.rhs > 0.0);

  // Property: random (model, kind, eps) draws keep a nonnegative margin.
  oracle::Gen gen(21);
  const char* models[] = {"cauchy:beta=2.5,n=1", "cauchy:beta=4,n=1", "ball:sigma=1,beta=1.5,n=1", "ball:sigma=0.5,beta=3,n=1"};
  for (int k = 0; k < 12; ++k) {
    const DensityModel mk = model_from_id(models[gen.integer(0, 3)]);
    const std::string kind = perturbation_kinds()[gen.integer(0, 3)];
    const double eps = gen.uniform(0.01, 0.3);
    const InequalityCase r = verify_thm1(mk, make_perturbation(mk, kind, eps), 2048);
    CHECK_MESSAGE(r.margin >= -1e-6, mk.id() << " " << kind << " eps=" << eps);
  }
}

TEST_CASE("Knothe clouds") {
  const DensityModel m = model_from_id("cauchy:beta=3,n=2");
  const DiscreteMeasure d = knothe_cloud(m, [&](const Vec& x) { return m.pdf(x); }, 20);
  CHECK(d.size() == 400);
  Vec mean = Vec::Zero(2);
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(d.weights[i] == doctest::Approx(1.0 / 400));
    mean += d.weights[i] * d.points[i];
  }
  CHECK(mean.norm() < 1e-10);
  CHECK_THROWS_AS(verify_thm1(model_from_id("cauchy:beta=4,n=3"), make_perturbation_nd(model_from_id("cauchy:beta=4,n=3"), "bump", 0.1)),
                  DomainError);
}

TEST_CASE("decomposition identity converges") {
  const DensityModel m = model_from_id("ball:sigma=1,beta=2,n=1");
  const DecompositionStudy s = decomposition_study(m, make_perturbation(m, "even", 0.1), 2048);
  CHECK(s.pass);
  CHECK(s.coarse.residual < 1e-8);
  CHECK(s.ratio < 0.6);
  CHECK(s.coarse.hessian_term >= 0.0);
}

TEST_CASE("quantitative theorems refuse bad inputs and reduce to the plain inequality at h = 0") {
  const DensityModel c = model_from_id("cauchy:beta=3,n=1");
  const DensityModel b = model_from_id("ball:sigma=1,beta=2,n=1");
  const PoincareEstimate hc = zero_h(c);
  REQUIRE(hc.validated);
  PoincareEstimate bad = hc;
  bad.validated = false;
  const PerturbationSpec matched = make_perturbation(c, "bump", 0.1, true);
  CHECK_THROWS_AS(verify_thm3(c, matched, bad), DomainError);
  CHECK_THROWS_AS(verify_thm3(c, make_perturbation(c, "bump", 0.1, false), hc), DomainError);
  CHECK_THROWS_AS(verify_thm2(c, matched, hc), DomainError);

  const QuantitativeCase q = verify_thm3(c, matched, hc);
  const InequalityCase plain = verify_thm1(c, matched);
  CHECK(q.result.rhs == doctest::Approx(plain.rhs).epsilon(1e-14));
  CHECK(q.rhs_plain == doctest::Approx(plain.rhs).epsilon(1e-14));

  // beta = n: the added cost vanishes for any h.
  const DensityModel deg = model_from_id("cauchy:beta=1.5,n=1");
  PoincareEstimate any = zero_h(deg);
  any.h = 3.0;
  const PerturbationSpec pd = make_perturbation(deg, "odd", 0.1, true);
  CHECK(verify_thm3(deg, pd, any).result.rhs >= verify_thm1(deg, pd).rhs);

  const PoincareEstimate hb = zero_h(b);
  const PerturbationSpec pb = make_perturbation(b, "even", 0.2, true);
  CHECK(remainder_check(b, pb, hb).rhs == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("entropy linearization target") {
  const DensityModel m = model_from_id("cauchy:beta=2,n=1");
  const PerturbationSpec g = make_perturbation(m, "ratio", 0.0);
  const Linearization lin = entropy_linearization(m, g);
  const double kappa = m.kp().kappa();
  const double target = 0.5 * (kappa + 1.0) * expect(m, [&](double x) { return g.g(x) * g.g(x) * std::pow(m.pdf(x), kappa); });
  CHECK(lin.target == doctest::Approx(target).epsilon(1e-8));
  CHECK(lin.rel_error < 1e-3);
  CHECK(lin.monotone);
  const Linearization zero = entropy_linearization(m, make_perturbation(m, "zero", 0.0));
  CHECK(zero.target == 0.0);
  CHECK(std::abs(zero.extrapolated) < 1e-14);

  const DensityModel b = model_from_id("ball:sigma=1,beta=2,n=1");
  const Linearization lb = entropy_linearization(b, make_perturbation(b, "even", 0.0));
  CHECK(lb.rel_error < 1e-3);
  const TransportLinearization tl = transport_linearization_lb(b, make_perturbation(b, "odd", 0.0));
  CHECK(tl.holds);
}

TEST_CASE("Brascamp-Lieb sides against Simpson") {
  const DensityModel b = model_from_id("ball:sigma=1,beta=2,n=1");
  const double lam = b.w().scale();
  const InequalityCase cb = verify_bl(b, [](double x) { return x; }, [](double) { return 1.0; }, 1);
  const double lhs = expect(b, [&](double x) { return lam * lam * std::pow(1.0 - 3 * x * x, 2) / (2.0 * lam); });
  const double rhs = 2.0 * expect(b, [&](double x) { return x * x * lam * (1.0 - x * x); });
  CHECK(cb.lhs == doctest::Approx(lhs).epsilon(1e-9));
  CHECK(cb.rhs == doctest::Approx(rhs).epsilon(1e-9));
  CHECK(cb.pass);

  const DensityModel c = model_from_id("cauchy:beta=3,n=1");
  const double lc = c.w().scale();
  const InequalityCase cc = verify_bl(c, [](double x) { return x; }, [](double) { return 1.0; }, 1);
  const double lhs_c = expect(c, [&](double x) { return lc * std::pow(1.0 + 3 * x * x, 2) / 2.0; });
  const double rhs_c = 3.0 * expect(c, [&](double x) { return x * x * lc * (1.0 + x * x); });
  CHECK(cc.lhs == doctest::Approx(lhs_c).epsilon(1e-6));
  CHECK(cc.rhs == doctest::Approx(rhs_c).epsilon(1e-6));

  const DensityModel c2 = model_from_id("cauchy:beta=2,n=1");
  const InequalityCase div = verify_bl(c2, [](double x) { return x; }, [](double) { return 1.0; }, 1);
  CHECK(std::isinf(div.lhs));
  CHECK(div.pass);
  CHECK_FALSE(bl_integrable(c2, 1));
  CHECK(bl_integrable(c, 1));
  CHECK_FALSE(bl_integrable(c, 2));
  CHECK(bl_integrable(b, 4));
  CHECK_THROWS_AS(verify_bl(b, [](double x) { return x * x; }, [](double x) { return 2 * x; }, 2), DomainError);
}

TEST_CASE("orthogonal polynomials") {
  for (const char* id : {"ball:sigma=1,beta=2,n=1", "cauchy:beta=6,n=1"}) {
    const DensityModel m = model_from_id(id);
    for (int d = 1; d <= 3; ++d) {
      for (bool lin : {false, true}) {
        if (lin && d < 2) continue;
        const PolyG p = orthogonal_polynomial(m, d, lin);
        CHECK(std::abs(expect(m, [&](double x) { return p.value(x); })) < 1e-8);
        CHECK(expect(m, [&](double x) { return p.value(x) * p.value(x); }) == doctest::Approx(1.0).epsilon(1e-6));
        if (lin) CHECK(std::abs(expect(m, [&](double x) { return x * p.value(x); })) < 1e-8);
      }
    }
  }
  CHECK_THROWS_AS(orthogonal_polynomial(model_from_id("cauchy:beta=2,n=1"), 3, false), DivergenceError);
}

TEST_CASE("quantitative Brascamp-Lieb sharpens the plain form") {
  const DensityModel b = model_from_id("ball:sigma=1,beta=2,n=1");
  PoincareEstimate h = zero_h(b);
  h.h = 1.0;
  const PolyG p = orthogonal_polynomial(b, 2, true);
  const QuantitativeBL q = verify_bl_quant(b, [&](double x) { return p.value(x); }, [&](double x) { return p.derivative(x); }, h);
  CHECK(q.shift == doctest::Approx(0.3 / 3.0));
  CHECK(q.result.lhs <= q.lhs_plain);
  CHECK(q.result.pass);
  CHECK_THROWS_AS(verify_bl_quant(b, [](double x) { return x; }, [](double) { return 1.0; }, h), DomainError);
}
