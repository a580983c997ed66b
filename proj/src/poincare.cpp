#include "kappaot/poincare.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

namespace kappaot {

// ---------------------------------------------------------------------------
// Quadrature measures

QuadMeasure quadrature_measure(const DensityModel& m, std::size_t cells_per_axis) {
  const int n = m.dim();
  if (n > 3) throw DomainError("quadrature_measure: n <= 3 only");
  std::vector<Rule1D> axes;
  for (int d = 0; d < n; ++d) {
    std::size_t cells = cells_per_axis;
    if (cells == 0) cells = n == 1 ? 2048 : (n == 2 ? 64 : 24);
    Grid1D g = Grid1D::linear(0.0, 1.0, 1);
    if (n == 1) {
      g = m.grid(cells);
    } else if (m.w().kind() == WKind::QuadraticCauchy) {
      const double spread = std::max(0.5 * m.kp().beta(), 1.0) * m.w().alpha();
      g = Grid1D::tangent(0.0, 1.0 / std::sqrt(spread), cells);
    } else if (m.w().kind() == WKind::QuadraticBall) {
      g = Grid1D::linear(-m.w().sigma(), m.w().sigma(), cells);
    } else {
      g = Grid1D::linear(m.w().custom_w()->lo[d], m.w().custom_w()->hi[d], cells);
    }
    axes.push_back(composite_rule(g, n == 1 ? 10 : 4));
  }
  const TensorRule rule = tensor_rule(axes);
  QuadMeasure q;
  q.dim = n;
  double total = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const Vec x = Eigen::Map<const Vec>(rule.point(k), n);
    const double w = rule.weights[k] * m.pdf(x);
    if (!(w > 0.0)) continue;
    q.points.insert(q.points.end(), rule.point(k), rule.point(k) + n);
    q.weights.push_back(w);
    q.wvals.push_back(m.w().value(x));
    total += w;
  }
  for (double& w : q.weights) w /= total;
  return q;
}

QuadMeasure quadrature_measure(const Density1D& rho) {
  QuadMeasure q;
  q.dim = 1;
  const Rule1D& r = rho.rule();
  double total = 0.0;
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    const double w = r.w[i] * rho.pdf(r.x[i]);
    if (!(w > 0.0)) continue;
    q.points.push_back(r.x[i]);
    q.weights.push_back(w);
    q.wvals.push_back(1.0);
    total += w;
  }
  for (double& w : q.weights) w /= total;
  return q;
}

// ---------------------------------------------------------------------------
// Test family

TestFamily step_family(int dim, double length, double width) {
  if (!(length > 0.0) || !(width > 0.0)) throw DomainError("step_family: length and width must be positive");
  TestFamily fam;
  fam.version = "poincare-steps-v1";
  const double d = width * length;
  for (int k = -12; k <= 12; ++k) {
    const double a = 0.25 * k * length;
    TestFunction f;
    f.name = "step(a=" + std::to_string(0.25 * k) + ")";
    f.value = [a, d](const Vec& x) { return std::tanh((x[0] - a) / d); };
    f.gradient = [a, d, dim](const Vec& x) {
      const double t = std::tanh((x[0] - a) / d);
      Vec g = Vec::Zero(dim);
      g[0] = (1.0 - t * t) / d;
      return g;
    };
    fam.functions.push_back(std::move(f));
  }
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& f : fam.functions)
    for (unsigned char c : f.name) h = (h ^ c) * 1099511628211ull;
  fam.hash = h;
  return fam;
}

double model_length(const DensityModel& m) {
  switch (m.w().kind()) {
    case WKind::QuadraticBall: return m.w().sigma();
    case WKind::QuadraticCauchy: return 1.0 / std::sqrt(m.w().alpha());
    default: return 0.5 * (m.w().custom_w()->hi[0] - m.w().custom_w()->lo[0]);
  }
}

namespace {

std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

TestFamily standard_family(int dim, double length) {
  if (!(length > 0.0)) throw DomainError("standard_family: length must be positive");
  TestFamily fam;
  fam.version = "poincare-family-v1";
  const double L = length;
  auto e1 = [dim](double v) {
    Vec g = Vec::Zero(dim);
    g[0] = v;
    return g;
  };

  // Polynomials in t = x_1 / L times exp(-t^2 / (2 s^2)).
  struct Poly {
    const char* name;
    double (*p)(double);
    double (*dp)(double);
  };
  static const Poly polys[] = {
      {"t", [](double t) { return t; }, [](double) { return 1.0; }},
      {"t2", [](double t) { return t * t; }, [](double t) { return 2.0 * t; }},
      {"t3", [](double t) { return t * t * t; }, [](double t) { return 3.0 * t * t; }},
      {"t4", [](double t) { return t * t * t * t; }, [](double t) { return 4.0 * t * t * t; }},
      {"t2-t", [](double t) { return t * t - t; }, [](double t) { return 2.0 * t - 1.0; }},
  };
  for (const auto& poly : polys) {
    for (double s : {0.5, 1.0, 2.0, 4.0}) {
      auto p = poly.p;
      auto dp = poly.dp;
      TestFunction f;
      f.name = std::string("poly:") + poly.name + ",s=" + fmt(s);
      f.value = [=](const Vec& x) {
        const double t = x[0] / L;
        return p(t) * std::exp(-t * t / (2.0 * s * s));
      };
      f.gradient = [=](const Vec& x) {
        const double t = x[0] / L;
        const double e = std::exp(-t * t / (2.0 * s * s));
        return e1((dp(t) - p(t) * t / (s * s)) * e / L);
      };
      fam.functions.push_back(std::move(f));
    }
  }
  const double centers[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
  const double widths[] = {0.25, 0.5, 1.0};
  for (double c : centers)
    for (double w : widths) {
      TestFunction f;
      f.name = "bump:c=" + fmt(c) + ",w=" + fmt(w);
      const double cx = c * L, wx = w * L;
      f.value = [=](const Vec& x) {
        Vec d = x;
        d[0] -= cx;
        return std::exp(-d.squaredNorm() / (2.0 * wx * wx));
      };
      f.gradient = [=](const Vec& x) {
        Vec d = x;
        d[0] -= cx;
        return Vec(-d / (wx * wx) * std::exp(-d.squaredNorm() / (2.0 * wx * wx)));
      };
      fam.functions.push_back(std::move(f));
    }
  for (double c : centers)
    for (double w : widths) {
      TestFunction f;
      f.name = "tent:c=" + fmt(c) + ",w=" + fmt(w);
      f.value = [=](const Vec& x) { return std::max(0.0, 1.0 - std::abs(x[0] / L - c) / w); };
      f.gradient = [=](const Vec& x) {
        const double t = x[0] / L - c;
        if (std::abs(t) >= w || t == 0.0) return e1(0.0);
        return e1((t > 0.0 ? -1.0 : 1.0) / (w * L));
      };
      fam.functions.push_back(std::move(f));
    }
  std::uint64_t h = fnv1a(fam.version);
  for (const auto& f : fam.functions) h = fnv1a(f.name + ";", h);
  fam.hash = h;
  return fam;
}

// ---------------------------------------------------------------------------
// Centres

const char* to_string(CenterKind c) { return c == CenterKind::Median ? "median" : "mean"; }

const char* to_string(PoincareMethod m) {
  switch (m) {
    case PoincareMethod::CauchyChain: return "cauchy-chain";
    case PoincareMethod::NumericalSearch: return "numerical-search";
    default: return "user-supplied";
  }
}

double median_or_center(const std::vector<double>& values, const std::vector<double>& weights, CenterKind kind) {
  if (values.empty() || values.size() != weights.size()) throw DomainError("median_or_center: bad input");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) throw DomainError("median_or_center: zero total weight");
  if (kind == CenterKind::Mean) {
    double acc = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) acc += weights[k] * values[k];
    return acc / total;
  }
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  // Interpolate the CDF through the midpoints of each atom's mass.
  const double half = 0.5 * total;
  double cum = 0.0, prev_mid = -1.0, prev_val = values[idx[0]];
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const double w = weights[idx[r]];
    const double mid = cum + 0.5 * w;
    const double v = values[idx[r]];
    if (mid >= half) {
      if (prev_mid < 0.0 || mid == prev_mid) return v;
      const double t = (half - prev_mid) / (mid - prev_mid);
      return prev_val + t * (v - prev_val);
    }
    cum += w;
    prev_mid = mid;
    prev_val = v;
  }
  return values[idx.back()];
}

double median_or_center(const TestFunction& f, const QuadMeasure& mu, CenterKind kind) {
  std::vector<double> vals(mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) vals[k] = f.value(mu.point(k));
  return median_or_center(vals, mu.weights, kind);
}

// ---------------------------------------------------------------------------
// Weighted Poincare

namespace {

struct Sampled {
  std::vector<double> value;
  std::vector<double> grad_norm;
};

Sampled sample_function(const TestFunction& f, const QuadMeasure& mu) {
  Sampled s;
  s.value.resize(mu.size());
  s.grad_norm.resize(mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) {
    const Vec x = mu.point(k);
    s.value[k] = f.value(x);
    s.grad_norm[k] = f.gradient(x).norm();
  }
  return s;
}

}  // namespace

std::string PoincareEstimate::to_json() const {
  nlohmann::ordered_json j;
  j["model"] = model_id;
  j["h"] = h;
  j["validated"] = validated;
  j["method"] = to_string(method);
  j["center"] = to_string(center);
  j["family_version"] = family_version;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(family_hash));
  j["family_hash"] = buf;
  j["family_size"] = family_size;
  j["worst_margin"] = worst_margin;
  return j.dump(2);
}

namespace {

// Everything in the F-form check that does not depend on h.
struct PreparedFamily {
  std::vector<std::string> names;
  std::vector<double> lhs;                // int F(|grad f|) W dmu
  std::vector<std::vector<double>> dev;   // |f - m_f| per node
};

PreparedFamily prepare(const QuadMeasure& mu, const TestFamily& family, CenterKind center) {
  PreparedFamily p;
  for (const auto& f : family.functions) {
    Sampled s = sample_function(f, mu);
    const double mf = median_or_center(s.value, mu.weights, center);
    double lhs = 0.0;
    for (std::size_t k = 0; k < mu.size(); ++k) {
      lhs += mu.weights[k] * F(s.grad_norm[k]) * mu.wvals[k];
      s.value[k] = std::abs(s.value[k] - mf);
    }
    p.names.push_back(f.name);
    p.lhs.push_back(lhs);
    p.dev.push_back(std::move(s.value));
  }
  return p;
}

double rhs_at(const QuadMeasure& mu, const std::vector<double>& dev, double h) {
  double rhs = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k) rhs += mu.weights[k] * F(h * dev[k]);
  return rhs;
}

PoincareEstimate evaluate(const QuadMeasure& mu, const PreparedFamily& p, double h, const TestFamily& family,
                          CenterKind center, PoincareMethod method) {
  PoincareEstimate est;
  est.h = h;
  est.method = method;
  est.center = center;
  est.family_version = family.version;
  est.family_hash = family.hash;
  est.family_size = family.functions.size();
  est.worst_margin = kInf;
  for (std::size_t i = 0; i < p.names.size(); ++i) {
    const double rhs = rhs_at(mu, p.dev[i], h);
    est.margins.push_back({p.names[i], p.lhs[i], rhs, p.lhs[i] - rhs});
    est.worst_margin = std::min(est.worst_margin, p.lhs[i] - rhs);
  }
  est.validated = est.worst_margin >= -1e-8;
  return est;
}

}  // namespace

PoincareEstimate verify_weighted_poincare(const QuadMeasure& mu, double h, const TestFamily& family,
                                          CenterKind center, PoincareMethod method) {
  if (!(h >= 0.0)) throw DomainError("verify_weighted_poincare: h must be nonnegative");
  return evaluate(mu, prepare(mu, family, center), h, family, center, method);
}

std::vector<TransferMargin> proposition1_transfer(const QuadMeasure& mu, const std::function<double(const Vec&)>& omega,
                                                  double h, const TestFamily& family, CenterKind center) {
  if (!(h > 0.0)) throw DomainError("proposition1_transfer: h must be positive");
  std::vector<double> om(mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) om[k] = omega(mu.point(k));
  std::vector<TransferMargin> out;
  for (const auto& f : family.functions) {
    const Sampled s = sample_function(f, mu);
    const double mf = median_or_center(s.value, mu.weights, center);
    double h_lhs = 0.0, h_rhs = 0.0, c_lhs = 0.0, c_rhs = 0.0;
    for (std::size_t k = 0; k < mu.size(); ++k) {
      const double dev = std::abs(s.value[k] - mf);
      h_lhs += mu.weights[k] * s.grad_norm[k] / h * om[k];
      h_rhs += mu.weights[k] * dev;
      c_lhs += mu.weights[k] * F(om[k] * s.grad_norm[k] / h);
      c_rhs += mu.weights[k] * F(dev);
    }
    TransferMargin t;
    t.name = f.name;
    t.hypothesis = h_lhs - h_rhs;
    t.conclusion = c_lhs - c_rhs;
    t.implication_holds = t.hypothesis < 0.0 || t.conclusion >= -1e-8;
    out.push_back(t);
  }
  return out;
}

CheegerResult cheeger_l1_check(const QuadMeasure& mu, const std::function<double(const Vec&)>& omega, double c_kappa,
                               const TestFamily& family, CenterKind center) {
  if (!(c_kappa > 0.0)) throw DomainError("cheeger_l1_check: C_kappa must be positive");
  std::vector<double> om(mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) om[k] = omega(mu.point(k));
  CheegerResult res;
  for (const auto& f : family.functions) {
    const Sampled s = sample_function(f, mu);
    const double mf = median_or_center(s.value, mu.weights, center);
    double dev = 0.0, grad = 0.0;
    for (std::size_t k = 0; k < mu.size(); ++k) {
      dev += mu.weights[k] * std::abs(s.value[k] - mf);
      grad += mu.weights[k] * s.grad_norm[k] * om[k];
    }
    const double rhs = 0.5 * c_kappa * grad;
    res.margins.push_back({f.name, dev, rhs, rhs - dev});
    const double ratio = grad > 0.0 ? 2.0 * dev / grad : 0.0;
    res.ratios.push_back(ratio);
    res.minimal_constant = std::max(res.minimal_constant, ratio);
    if (rhs - dev < 0.0) res.ok = false;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Radii and radial integrals

GeometricMeanRadius geometric_mean_radius(const DensityModel& m, const std::vector<double>& qs) {
  if (!m.w().is_radial()) throw DomainError("geometric_mean_radius: radial families only");
  const int n = m.dim();
  const double beta = m.kp().beta();
  const bool ball = m.w().kind() == WKind::QuadraticBall;
  const double t_hi = ball ? std::log(m.w().sigma()) : kInf;
  // r = e^t: int g(r) r^{n-1} rho(r) dr = int g(e^t) e^{n t} rho(e^t) dt.
  auto radial = [&](double t) {
    if (n * t > 600.0 || t < -700.0) return 0.0;  // both tails decay exponentially in t
    const double r = std::exp(t);
    return std::exp(n * t) * m.pdf_from_w(m.w().radial_value(r * r));
  };
  const double mass = integrate(radial, -kInf, t_hi, 1e-13);
  const double log_moment = integrate([&](double t) { return t * radial(t); }, -kInf, t_hi, 1e-13) / mass;
  if (!std::isfinite(log_moment)) throw DivergenceError("geometric_mean_radius: log-moment diverges");
  GeometricMeanRadius out;
  out.m = std::exp(log_moment);
  auto moment = [&](double q) {
    if (!ball && !(q < 2.0 * beta - n)) throw DivergenceError("geometric_mean_radius: moment of order q diverges");
    return integrate([&](double t) { return std::exp(q * t) * radial(t); }, -kInf, t_hi, 1e-13) / mass;
  };
  if (ball) out.m1 = moment(1.0);
  else out.m1 = laplace_In(n, beta).numeric / laplace_In(n - 1, beta).numeric / std::sqrt(m.w().alpha());
  for (double q : qs) out.m_q.emplace_back(q, std::pow(moment(q), 1.0 / q));
  return out;
}

double geometric_mean_radius(const DiscreteMeasure& mu) {
  double acc = 0.0, total = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k) {
    if (mu.weights[k] == 0.0) continue;
    const double r = mu.points[k].norm();
    if (r == 0.0) return 0.0;
    acc += mu.weights[k] * std::log(r);
    total += mu.weights[k];
  }
  return std::exp(acc / total);
}

LaplaceResult laplace_In(int n, double beta) {
  if (n < 0) throw DomainError("laplace_In: n must be nonnegative");
  if (!(2.0 * beta > n + 1)) throw DivergenceError("laplace_In: needs 2 beta > n + 1");
  const double a = 0.5 * (n + 1);
  // r = t / sqrt(beta) keeps the peak at t = O(1) for every beta.
  auto f = [&](double t) {
    const double tn = n == 0 ? 1.0 : std::pow(t, n);
    return tn * std::exp(-beta * std::log1p(t * t / beta));
  };
  LaplaceResult r;
  r.numeric = std::pow(beta, -a) * integrate(f, 0.0, kInf, 1e-14);
  r.asymptotic = 0.5 * std::tgamma(a) * std::pow(beta, -a);
  r.ratio = r.numeric / r.asymptotic;
  return r;
}

std::function<double(const Vec&)> cauchy_weight(double m, int n, double beta) {
  if (!(beta > n)) throw DomainError("cauchy_weight: needs beta > n");
  const double slope = 1.0 / (beta - n);
  return [m, slope](const Vec& x) { return m + slope * x.norm(); };
}

CauchyBound cauchy_h_lower_bound(int n, double beta, double c_kappa) {
  if (!(beta > n)) throw DomainError("cauchy_h_lower_bound: needs beta > n");
  if (!(c_kappa > 0.0)) throw DomainError("cauchy_h_lower_bound: C_kappa must be positive");
  const DensityModel model = normalize(WSpec::cauchy(n), KappaParam::case_two(beta));
  const GeometricMeanRadius g = geometric_mean_radius(model, {});
  CauchyBound b;
  b.m = g.m;
  b.m1 = g.m1;
  b.lambda = model.w().scale();
  b.h_raw = 1.0 / (6.0 * c_kappa * std::max(g.m, 1.0 / (beta - n)));
  b.h = std::min(1.0, b.lambda) * b.h_raw;
  // Envelope of m1 / sqrt(n beta') over beta' in [n + 1, 100 (n + 1)].
  const double lo = n + 1.0, hi = 100.0 * (n + 1.0);
  for (int k = 0; k <= 24; ++k) {
    const double bp = lo * std::pow(hi / lo, k / 24.0);
    const DensityModel mk = normalize(WSpec::cauchy(n), KappaParam::case_two(bp));
    const double m1 = geometric_mean_radius(mk, {}).m1;
    b.envelope = std::max(b.envelope, m1 / std::sqrt(n * bp));
  }
  b.h_asymptotic = 1.0 / (6.0 * c_kappa * std::max(b.envelope * std::sqrt(n * beta), 1.0 / (beta - n)));
  return b;
}

PoincareEstimate search_poincare_constant(const DensityModel& m, const QuadMeasure& mu, const TestFamily& family,
                                          CenterKind center) {
  const PreparedFamily p = prepare(mu, family, center);
  auto passes = [&](double h) {
    for (std::size_t i = 0; i < p.names.size(); ++i)
      if (p.lhs[i] - rhs_at(mu, p.dev[i], h) < -1e-8) return false;
    return true;
  };
  double lo = 0.0, hi = 1.0;
  while (passes(hi) && hi < 1e6) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (passes(mid)) lo = mid;
    else hi = mid;
  }
  PoincareEstimate est = evaluate(mu, p, 0.5 * lo, family, center, PoincareMethod::NumericalSearch);
  est.model_id = m.id();
  return est;
}

ChainResult cauchy_chain(const DensityModel& m, double c_kappa, CenterKind center) {
  if (m.w().kind() != WKind::QuadraticCauchy || m.kp().regime() != Case::Two)
    throw DomainError("cauchy_chain: Cauchy models only");
  if (std::abs(m.w().alpha() - 1.0) > 1e-15) throw DomainError("cauchy_chain: needs alpha = 1");
  const int n = m.dim();
  const double beta = m.kp().beta();
  if (!(beta > n)) throw DomainError("cauchy_chain: needs beta > n");
  ChainResult out;
  const QuadMeasure mu = quadrature_measure(m);
  const TestFamily family = standard_family(n, model_length(m));
  out.m = geometric_mean_radius(m, {}).m;
  const auto omega = cauchy_weight(out.m, n, beta);
  out.cheeger = cheeger_l1_check(mu, omega, c_kappa > 0.0 ? c_kappa : 1.0, family, center);
  out.c_kappa = c_kappa > 0.0 ? c_kappa : out.cheeger.minimal_constant;
  if (!(c_kappa > 0.0)) out.cheeger = cheeger_l1_check(mu, omega, out.c_kappa, family, center);
  out.bound = cauchy_h_lower_bound(n, beta, out.c_kappa);
  out.estimate = verify_weighted_poincare(mu, out.bound.h, family, center, PoincareMethod::CauchyChain);
  out.estimate.model_id = m.id();
  return out;
}

}  // namespace kappaot
