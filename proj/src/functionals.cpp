#include "kappaot/functionals.hpp"

#include <algorithm>

#include <Eigen/Eigenvalues>

namespace kappaot {

double F(double t) {
  if (!(t >= 0.0)) throw DomainError("F: argument must be nonnegative");
  if (t == kInf) return kInf;
  if (t < 1e-4) {
    // t^2/2 - t^3/3 + t^4/4 - ..., avoids cancellation in t - log1p(t).
    double term = t * t, acc = 0.0;
    for (int k = 2; k < 9; ++k) {
      acc += ((k % 2 == 0) ? 1.0 : -1.0) * term / k;
      term *= t;
    }
    return acc;
  }
  return t - std::log1p(t);
}

double CostSpec::tilde_prefactor() const {
  if (kp.regime() == Case::One) return c;
  const double beta = kp.beta();
  const double gap = 1.0 - w.dim() / beta;
  return c / beta * gap * gap;
}

namespace {

void check_source(double wx) {
  if (!(wx > 0.0)) throw DomainError("cost_c: x must lie in the open support {W > 0}");
}

}  // namespace

double cost_c(const Vec& x, const Vec& y, const CostSpec& spec) {
  const WSpec& w = spec.w;
  const double wx = w.value(x);
  if (spec.kp.regime() == Case::One) check_source(wx);
  const double cf = spec.kp.cost_factor();
  switch (w.kind()) {
    case WKind::QuadraticBall: return -cf * w.scale() * (y - x).squaredNorm();
    case WKind::QuadraticCauchy: return cf * w.scale() * w.alpha() * (y - x).squaredNorm();
    default: return cf * (w.value(y) - wx - w.gradient(x).dot(y - x));
  }
}

double cost_c(double x, double y, const CostSpec& spec) {
  const WSpec& w = spec.w;
  const double wx = w.value(x);
  if (spec.kp.regime() == Case::One) check_source(wx);
  const double cf = spec.kp.cost_factor();
  const double d = y - x;
  switch (w.kind()) {
    case WKind::QuadraticBall: return -cf * w.scale() * d * d;
    case WKind::QuadraticCauchy: return cf * w.scale() * w.alpha() * d * d;
    default: return cf * (w.value(y) - wx - w.d1(x) * d);
  }
}

double cost_tilde(const Vec& x, const Vec& y, const CostSpec& spec) {
  return spec.tilde_prefactor() * F(spec.h * (y - x).norm());
}

double cost_tilde(double x, double y, const CostSpec& spec) {
  return spec.tilde_prefactor() * F(spec.h * std::abs(y - x));
}

double cost(const Vec& x, const Vec& y, const CostSpec& spec) {
  const double base = cost_c(x, y, spec);
  return spec.combined ? base + cost_tilde(x, y, spec) : base;
}

double cost(double x, double y, const CostSpec& spec) {
  const double base = cost_c(x, y, spec);
  return spec.combined ? base + cost_tilde(x, y, spec) : base;
}

// ---------------------------------------------------------------------------
// Entropies

namespace {

double entropy_integrand(double rho, double wval, const KappaParam& kp) {
  if (rho == 0.0) return 0.0;
  if (kp.regime() == Case::One && !(wval > 0.0)) return kInf;
  const double kappa = kp.kappa();
  // (rho^{1+kappa} - rho)/kappa = rho expm1(kappa log rho)/kappa
  return rho * std::expm1(kappa * std::log(rho)) / kappa + kp.cost_factor() * rho * wval;
}

bool needs_tail_check(const DensityModel& m) { return m.kp().regime() == Case::Two; }

}  // namespace

double relative_entropy_density(double rho, double rho_m, double kappa) {
  if (rho_m == 0.0) return rho == 0.0 ? 0.0 : kInf;
  const double u = rho / rho_m - 1.0;
  const double a = kappa + 1.0;
  double phi = 0.0;
  if (std::abs(u) < 1e-3) {
    // a/2 u^2 + a(a-2)/6 u^3 + a(a-2)(a-3)/24 u^4 + ...
    double coef = a / 2.0, power = u * u;
    for (int k = 2; k < 8; ++k) {
      phi += coef * power;
      coef *= (a - k) / (k + 1.0);
      power *= u;
    }
  } else {
    phi = (std::expm1(a * std::log1p(u)) - a * u) / kappa;
  }
  return std::pow(rho_m, a) * phi;
}

double entropy_H(const Density1D& rho, const DensityModel& m) {
  const KappaParam& kp = m.kp();
  auto integrand = [&](double x) { return entropy_integrand(rho.pdf(x), m.w().value(x), kp); };
  if (needs_tail_check(m)) {
    auto a = [&](const Vec& x) { const double r = rho.pdf(x[0]); return std::pow(r, 1.0 + kp.kappa()); };
    auto b = [&](const Vec& x) { return rho.pdf(x[0]) * m.w().value(x[0]); };
    if (!tail_integrable(a, 1) || !tail_integrable(b, 1)) return kInf;
  }
  const Rule1D& r = rho.rule();
  double acc = 0.0;
  for (std::size_t i = 0; i < r.x.size(); ++i) acc += r.w[i] * integrand(r.x[i]);
  return acc;
}

double entropy_H(const std::function<double(const Vec&)>& rho, const TensorRule& rule, const DensityModel& m) {
  const KappaParam& kp = m.kp();
  const int n = m.dim();
  if (needs_tail_check(m)) {
    auto a = [&](const Vec& x) { return std::pow(rho(x), 1.0 + kp.kappa()); };
    auto b = [&](const Vec& x) { return rho(x) * m.w().value(x); };
    if (!tail_integrable(a, n) || !tail_integrable(b, n)) return kInf;
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const Vec x = Eigen::Map<const Vec>(rule.point(k), n);
    acc += rule.weights[k] * entropy_integrand(rho(x), m.w().value(x), kp);
  }
  return acc;
}

double relative_entropy(const Density1D& rho, const DensityModel& m) {
  const double kappa = m.kp().kappa();
  if (needs_tail_check(m)) {
    auto f = [&](const Vec& x) { return relative_entropy_density(rho.pdf(x[0]), m.pdf(x[0]), kappa); };
    if (!tail_integrable(f, 1)) return kInf;
  }
  const Rule1D& r = rho.rule();
  double acc = 0.0;
  for (std::size_t i = 0; i < r.x.size(); ++i)
    acc += r.w[i] * relative_entropy_density(rho.pdf(r.x[i]), m.pdf(r.x[i]), kappa);
  return acc;
}

double relative_entropy(const std::function<double(const Vec&)>& rho, const TensorRule& rule,
                        const DensityModel& m) {
  const double kappa = m.kp().kappa();
  const int n = m.dim();
  if (needs_tail_check(m)) {
    auto f = [&](const Vec& x) { return relative_entropy_density(rho(x), m.pdf(x), kappa); };
    if (!tail_integrable(f, n)) return kInf;
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const Vec x = Eigen::Map<const Vec>(rule.point(k), n);
    acc += rule.weights[k] * relative_entropy_density(rho(x), m.pdf(x), kappa);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Symmetric matrices

namespace {

void check_domain(const Vec& lambda, MatrixDomain domain) {
  for (int i = 0; i < lambda.size(); ++i) {
    if (domain == MatrixDomain::EigGtMinusOne && !(lambda[i] > 0.0))
      throw DomainError("SymmetricMatrixSample: eigenvalues of M must be positive (mu > -1)");
    if (domain == MatrixDomain::Nonnegative && !(lambda[i] >= 0.0))
      throw DomainError("SymmetricMatrixSample: eigenvalues of M must be nonnegative");
  }
}

}  // namespace

SymmetricMatrixSample SymmetricMatrixSample::from_matrix(const Mat& M, MatrixDomain domain) {
  if (M.rows() != M.cols() || M.rows() == 0) throw DomainError("SymmetricMatrixSample: M must be square");
  const double scale = 1.0 + M.lpNorm<Eigen::Infinity>();
  if ((M - M.transpose()).lpNorm<Eigen::Infinity>() > 1e-12 * scale)
    throw DomainError("SymmetricMatrixSample: M is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (M + M.transpose()));
  if (es.info() != Eigen::Success) throw Error("SymmetricMatrixSample: eigensolver failed");
  SymmetricMatrixSample s;
  s.M = M;
  s.lambda = es.eigenvalues();
  s.Q = es.eigenvectors();
  if (domain == MatrixDomain::Nonnegative)
    for (int i = 0; i < s.lambda.size(); ++i)
      if (s.lambda[i] < 0.0 && s.lambda[i] > -1e-14 * scale) s.lambda[i] = 0.0;
  s.mu = s.lambda.array() - 1.0;
  s.domain = domain;
  check_domain(s.lambda, domain);
  const Mat back = s.Q * s.lambda.asDiagonal() * s.Q.transpose();
  if ((back - M).lpNorm<Eigen::Infinity>() > 1e-10 * scale)
    throw Error("SymmetricMatrixSample: eigendecomposition does not reconstruct M");
  return s;
}

SymmetricMatrixSample SymmetricMatrixSample::from_spectrum(const Mat& Q, const Vec& lambda, MatrixDomain domain) {
  const auto n = lambda.size();
  if (Q.rows() != n || Q.cols() != n) throw DomainError("SymmetricMatrixSample: shape mismatch");
  if ((Q.transpose() * Q - Mat::Identity(n, n)).lpNorm<Eigen::Infinity>() > 1e-10)
    throw DomainError("SymmetricMatrixSample: eigenbasis is not orthogonal");
  check_domain(lambda, domain);
  SymmetricMatrixSample s;
  const Mat M = Q * lambda.asDiagonal() * Q.transpose();
  s.M = 0.5 * (M + M.transpose());
  s.lambda = lambda;
  s.mu = lambda.array() - 1.0;
  s.Q = Q;
  s.domain = domain;
  const double scale = 1.0 + s.M.lpNorm<Eigen::Infinity>();
  if ((Q * lambda.asDiagonal() * Q.transpose() - s.M).lpNorm<Eigen::Infinity>() > 1e-10 * scale)
    throw Error("SymmetricMatrixSample: reconstruction failed");
  return s;
}

SymmetricMatrixSample random_symmetric(int n, MatrixDomain domain, Rng& rng) {
  if (n < 1) throw DomainError("random_symmetric: n must be positive");
  Mat g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Mat> qr(g);
  Mat Q = qr.householderQ();
  const Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  static constexpr double kScales[] = {0.01, 0.3, 3.0};
  const double scale = kScales[rng.next() % 3];
  Vec lambda(n);
  for (int i = 0; i < n; ++i) {
    lambda[i] = std::exp(scale * rng.normal());
    if (domain == MatrixDomain::Nonnegative && rng.uniform() < 0.1) lambda[i] = 0.0;
  }
  return SymmetricMatrixSample::from_spectrum(Q, lambda, domain);
}

double G_kappa(const SymmetricMatrixSample& s, double kappa) {
  if (kappa == 0.0 || !std::isfinite(kappa)) throw DomainError("G_kappa: kappa must be finite and nonzero");
  // Extended precision: the two terms cancel to O(|mu|^2) out of O(|mu|).
  long double log_det = 0.0L, trace = 0.0L;
  bool singular = false;
  for (int i = 0; i < s.lambda.size(); ++i) {
    if (s.lambda[i] < 0.0) throw DomainError("G_kappa: M has a negative eigenvalue");
    if (s.lambda[i] == 0.0) singular = true;
    else log_det += std::log1p(static_cast<long double>(s.mu[i]));
    trace += s.mu[i];
  }
  const long double k = kappa;
  if (singular) {
    if (kappa > 0.0) throw DomainError("G_kappa: singular M needs kappa < 0");
    return static_cast<double>(-1.0L / k + trace);  // det^{-kappa} extends by 0
  }
  return static_cast<double>(std::expm1(-k * log_det) / k + trace);
}

double G_kappa(double t, double kappa) {
  if (kappa == 0.0 || !std::isfinite(kappa)) throw DomainError("G_kappa: kappa must be finite and nonzero");
  if (t < 0.0) throw DomainError("G_kappa: negative argument");
  if (t == 0.0) {
    if (kappa > 0.0) throw DomainError("G_kappa: singular M needs kappa < 0");
    return -1.0 / kappa - 1.0;
  }
  const long double mu = static_cast<long double>(t) - 1.0L;
  const long double k = kappa;
  return static_cast<double>(std::expm1(-k * std::log1p(mu)) / k + mu);
}

BoundResult lemma_case1_bound(const SymmetricMatrixSample& s, double beta, double c) {
  if (!(beta > 0.0)) throw DomainError("lemma_case1_bound: beta must be positive");
  for (int i = 0; i < s.lambda.size(); ++i)
    if (!(s.lambda[i] > 0.0)) throw DomainError("lemma_case1_bound: needs eigenvalues of M - I above -1");
  BoundResult r;
  r.lhs = G_kappa(s, 1.0 / beta);
  for (int i = 0; i < s.mu.size(); ++i) {
    const double m = std::abs(s.mu[i]);
    r.rhs += std::min(m * m, m);
  }
  r.rhs *= c;
  r.margin = r.lhs - r.rhs;
  return r;
}

double scalar_log_bound(double t, double c) {
  if (!(t >= -1.0)) throw DomainError("scalar_log_bound: t must be >= -1");
  if (t == -1.0) return kInf;
  const double a = std::abs(t);
  return t - std::log1p(t) - c * std::min(t * t, a);
}

double log_quadratic_bound(double s, double t) {
  if (!(s > 0.0) || !(t > 0.0)) throw DomainError("log_quadratic_bound: s and t must be positive");
  const double r = (s - t) / t;
  const double mx = std::max(s, t);
  const double q = (s - t) / mx;
  return r - std::log1p(r) - 0.5 * q * q;
}

BoundResult lemma_case2_bound(const SymmetricMatrixSample& s, double beta) {
  const int n = s.dim();
  if (!(beta >= n)) throw DomainError("lemma_case2_bound: needs beta >= n");
  BoundResult r;
  r.lhs = G_kappa(s, -1.0 / beta);
  const double gap = 1.0 - n / beta;
  r.rhs = 3.0 / (64.0 * beta) * gap * gap * F(s.mu.norm());
  r.margin = r.lhs - r.rhs;
  return r;
}

BoundResult trace_F_sphere_bound(const Mat& M, std::uint64_t seed, std::size_t mc_points) {
  const int n = static_cast<int>(M.rows());
  if (M.cols() != n || n == 0) throw DomainError("trace_F_sphere_bound: M must be square");
  const double scale = 1.0 + M.lpNorm<Eigen::Infinity>();
  if ((M - M.transpose()).lpNorm<Eigen::Infinity>() > 1e-12 * scale)
    throw DomainError("trace_F_sphere_bound: M is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  const Vec lambda = es.eigenvalues();
  BoundResult r;
  for (int i = 0; i < n; ++i) {
    if (!(lambda[i] > -1.0)) throw DomainError("trace_F_sphere_bound: eigenvalues must exceed -1");
    r.lhs += F(std::abs(lambda[i]));
  }
  const double root_n = std::sqrt(static_cast<double>(n));
  if (n == 1) {
    r.rhs = F(std::abs(M(0, 0))) / 8.0;
  } else if (n == 2) {
    auto f = [&](double theta) {
      const Eigen::Vector2d u(std::cos(theta), std::sin(theta));
      return F(root_n * (M * u).norm());
    };
    r.rhs = integrate(f, 0.0, 2.0 * std::numbers::pi, 1e-12) / (2.0 * std::numbers::pi) / 8.0;
  } else {
    if (mc_points < 2) throw DomainError("trace_F_sphere_bound: need at least 2 sphere points");
    Rng rng(seed);
    double mean = 0.0, m2 = 0.0;
    Vec u(n);
    for (std::size_t k = 0; k < mc_points; ++k) {
      double norm = 0.0;
      do {
        for (int d = 0; d < n; ++d) u[d] = rng.normal();
        norm = u.norm();
      } while (norm < 1e-12);
      const double v = F(root_n * (M * (u / norm)).norm());
      const double delta = v - mean;
      mean += delta / static_cast<double>(k + 1);
      m2 += delta * (v - mean);
    }
    const double var = m2 / static_cast<double>(mc_points - 1);
    r.rhs = mean / 8.0;
    r.std_error = std::sqrt(var / static_cast<double>(mc_points)) / 8.0;
  }
  r.margin = r.lhs - r.rhs;
  return r;
}

double sphere_norm_constant(int n) {
  if (n < 1) throw DomainError("sphere_norm_constant: n must be positive");
  return std::exp(std::lgamma(0.5 * n) - 0.5 * std::log(std::numbers::pi) - std::lgamma(0.5 * (n + 1)));
}

SphereEnvelope sphere_norm_envelope(int n_max) {
  SphereEnvelope e{kInf, 0.0};
  for (int n = 1; n <= n_max; ++n) {
    const double v = sphere_norm_constant(n) * std::sqrt(static_cast<double>(n));
    e.lower = std::min(e.lower, v);
    e.upper = std::max(e.upper, v);
  }
  return e;
}

}  // namespace kappaot
