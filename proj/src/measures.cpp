#include "kappaot/measures.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <boost/math/special_functions/beta.hpp>

namespace kappaot {

// ---------------------------------------------------------------------------
// KappaParam

KappaParam KappaParam::from_kappa(double kappa) {
  if (!std::isfinite(kappa) || kappa == 0.0)
    throw DomainError("KappaParam: kappa must be finite and nonzero (0 is the log-concave limit)");
  if (kappa <= -1.0) throw DomainError("KappaParam: kappa must exceed -1");
  if (kappa > 0.0) return KappaParam(kappa, 1.0 / kappa, Case::One);
  return KappaParam(kappa, -1.0 / kappa, Case::Two);
}

KappaParam KappaParam::case_one(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("KappaParam: Case One needs 0 < beta < inf");
  return KappaParam(1.0 / beta, beta, Case::One);
}

KappaParam KappaParam::case_two(double beta) {
  if (!(beta >= 1.0) || !std::isfinite(beta)) throw DomainError("KappaParam: Case Two needs beta >= 1");
  return KappaParam(-1.0 / beta, beta, Case::Two);
}

// ---------------------------------------------------------------------------
// WSpec

WSpec WSpec::ball(int dim, double sigma) {
  if (dim < 1) throw DomainError("WSpec: dimension must be positive");
  if (!(sigma > 0.0)) throw DomainError("WSpec: ball radius sigma must be positive");
  WSpec w;
  w.kind_ = WKind::QuadraticBall;
  w.dim_ = dim;
  w.sigma_ = sigma;
  return w;
}

WSpec WSpec::cauchy(int dim, double alpha) {
  if (dim < 1) throw DomainError("WSpec: dimension must be positive");
  if (!(alpha > 0.0)) throw DomainError("WSpec: curvature alpha must be positive");
  WSpec w;
  w.kind_ = WKind::QuadraticCauchy;
  w.dim_ = dim;
  w.alpha_ = alpha;
  return w;
}

WSpec WSpec::custom(int dim, CustomW cw, std::uint64_t gate_seed, int gate_points) {
  if (dim < 1) throw DomainError("WSpec: dimension must be positive");
  if (!cw.value || !cw.gradient || !cw.hessian)
    throw DomainError("WSpec: custom W needs value, gradient and Hessian");
  if (cw.lo.size() != dim || cw.hi.size() != dim || !((cw.hi - cw.lo).minCoeff() > 0.0))
    throw DomainError("WSpec: custom W needs a nonempty bounding box");

  // Finite-difference consistency gate.
  Rng rng(gate_seed);
  for (int k = 0; k < gate_points; ++k) {
    Vec x(dim);
    for (int d = 0; d < dim; ++d) {
      const double pad = 0.05 * (cw.hi[d] - cw.lo[d]);
      x[d] = rng.uniform(cw.lo[d] + pad, cw.hi[d] - pad);
    }
    const double f = cw.value(x);
    const Vec g = cw.gradient(x);
    const Mat hm = cw.hessian(x);
    if (g.size() != dim || hm.rows() != dim || hm.cols() != dim)
      throw DomainError("WSpec: custom derivative has the wrong shape");
    const double step = 1e-5 * (1.0 + x.norm());
    Vec g_fd(dim);
    Mat h_fd(dim, dim);
    for (int d = 0; d < dim; ++d) {
      Vec xp = x, xm = x;
      xp[d] += step;
      xm[d] -= step;
      g_fd[d] = (cw.value(xp) - cw.value(xm)) / (2.0 * step);
      h_fd.col(d) = (cw.gradient(xp) - cw.gradient(xm)) / (2.0 * step);
    }
    const double gscale = g.lpNorm<Eigen::Infinity>() + std::abs(f) + 1.0;
    const double hscale = hm.lpNorm<Eigen::Infinity>() + gscale;
    if ((g - g_fd).lpNorm<Eigen::Infinity>() > 1e-6 * gscale)
      throw DomainError("WSpec: custom gradient disagrees with finite differences of W");
    if ((hm - h_fd).lpNorm<Eigen::Infinity>() > 1e-6 * hscale)
      throw DomainError("WSpec: custom Hessian disagrees with finite differences of the gradient");
  }

  WSpec w;
  w.kind_ = WKind::Custom;
  w.dim_ = dim;
  w.custom_ = std::make_shared<const CustomW>(std::move(cw));
  return w;
}

WSpec WSpec::scaled(double factor) const {
  if (!(factor > 0.0)) throw DomainError("WSpec::scaled: factor must be positive");
  WSpec w = *this;
  w.scale_ *= factor;
  return w;
}

double WSpec::radial_value(double r2) const {
  if (kind_ == WKind::QuadraticBall) return scale_ * (sigma_ * sigma_ - r2);
  return scale_ * (1.0 + alpha_ * r2);
}

double WSpec::value(const Vec& x) const {
  if (kind_ == WKind::Custom) return scale_ * custom_->value(x);
  return radial_value(x.squaredNorm());
}

Vec WSpec::gradient(const Vec& x) const {
  switch (kind_) {
    case WKind::QuadraticBall: return -2.0 * scale_ * x;
    case WKind::QuadraticCauchy: return 2.0 * scale_ * alpha_ * x;
    default: return scale_ * custom_->gradient(x);
  }
}

Mat WSpec::hessian(const Vec& x) const {
  switch (kind_) {
    case WKind::QuadraticBall: return -2.0 * scale_ * Mat::Identity(dim_, dim_);
    case WKind::QuadraticCauchy: return 2.0 * scale_ * alpha_ * Mat::Identity(dim_, dim_);
    default: return scale_ * custom_->hessian(x);
  }
}

double WSpec::value(double x) const {
  if (kind_ == WKind::Custom) return scale_ * custom_->value(Vec::Constant(1, x));
  return radial_value(x * x);
}

double WSpec::d1(double x) const {
  switch (kind_) {
    case WKind::QuadraticBall: return -2.0 * scale_ * x;
    case WKind::QuadraticCauchy: return 2.0 * scale_ * alpha_ * x;
    default: return scale_ * custom_->gradient(Vec::Constant(1, x))[0];
  }
}

double WSpec::d2(double x) const {
  switch (kind_) {
    case WKind::QuadraticBall: return -2.0 * scale_;
    case WKind::QuadraticCauchy: return 2.0 * scale_ * alpha_;
    default: return scale_ * custom_->hessian(Vec::Constant(1, x))(0, 0);
  }
}

// ---------------------------------------------------------------------------
// Normalizing constants

double closed_form_constant(Family family, int n, double beta, double sigma) {
  if (n < 1) throw DomainError("closed_form_constant: dimension must be positive");
  const double half_n = 0.5 * n;
  if (family == Family::BallBeta) {
    if (!(sigma > 0.0)) throw DomainError("closed_form_constant: sigma must be positive");
    if (!(beta >= 0.0)) throw DomainError("closed_form_constant: ball family needs beta >= 0");
    const double log_c = (2.0 * beta + n) * std::log(sigma) + half_n * std::log(std::numbers::pi) +
                         std::lgamma(beta + 1.0) - std::lgamma(beta + half_n + 1.0);
    return std::exp(log_c);
  }
  if (!(beta > half_n)) throw DivergenceError("closed_form_constant: Cauchy family needs beta > n/2");
  return std::exp(half_n * std::log(std::numbers::pi) + std::lgamma(beta - half_n) - std::lgamma(beta));
}

namespace {

double custom_constant(const WSpec& w, const KappaParam& kp) {
  const auto* cw = w.custom_w();
  const double e = kp.exponent();
  auto integrand = [&](const Vec& x) {
    const double v = w.value(x);
    if (kp.regime() == Case::One) return v > 0.0 ? std::pow(v, e) : 0.0;
    if (!(v > 0.0)) throw DomainError("normalize: Case Two W must be positive");
    return std::pow(v, e);
  };
  const int n = w.dim();
  if (n == 1) {
    return integrate([&](double x) { return integrand(Vec::Constant(1, x)); }, cw->lo[0], cw->hi[0], 1e-13);
  }
  if (n > 3) throw DomainError("normalize: custom quadrature is limited to n <= 3");
  std::vector<Rule1D> axes;
  for (int d = 0; d < n; ++d) axes.push_back(composite_rule(Grid1D::linear(cw->lo[d], cw->hi[d], 64), 8));
  const TensorRule rule = tensor_rule(axes);
  double total = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const Vec x = Eigen::Map<const Vec>(rule.point(k), n);
    total += rule.weights[k] * integrand(x);
  }
  return total;
}

}  // namespace

DensityModel::DensityModel(KappaParam kp, WSpec w, double z, bool normalized, std::string id)
    : kp_(kp), w_(std::move(w)), z_(z), normalized_(normalized), factor_(normalized ? 1.0 : 1.0 / z),
      id_(std::move(id)) {}

double DensityModel::pdf_from_w(double wval) const {
  if (!(wval > 0.0)) return 0.0;
  return factor_ * std::pow(wval, kp_.exponent());
}

// A custom W lives on its bounding box; the density vanishes outside it.
double DensityModel::pdf(const Vec& x) const {
  if (const auto* cw = w_.custom_w())
    for (int d = 0; d < x.size(); ++d)
      if (x[d] < cw->lo[d] || x[d] > cw->hi[d]) return 0.0;
  return pdf_from_w(w_.value(x));
}

double DensityModel::pdf(double x) const {
  if (const auto* cw = w_.custom_w())
    if (x < cw->lo[0] || x > cw->hi[0]) return 0.0;
  return pdf_from_w(w_.value(x));
}

bool DensityModel::in_support(const Vec& x) const { return w_.value(x) > 0.0; }

namespace {

/// P(|X| <= r) for the radial families.
double radial_cdf(const DensityModel& m, double r) {
  const double n = m.dim();
  const double beta = m.kp().beta();
  if (m.w().kind() == WKind::QuadraticBall) {
    const double s = m.w().sigma();
    if (r >= s) return 1.0;
    return boost::math::ibeta(0.5 * n, beta + 1.0, r * r / (s * s));
  }
  const double a = m.w().alpha() * r * r;
  return boost::math::ibeta(0.5 * n, beta - 0.5 * n, a / (1.0 + a));
}

double radial_quantile(const DensityModel& m, double u) {
  const double n = m.dim();
  const double beta = m.kp().beta();
  if (m.w().kind() == WKind::QuadraticBall) {
    const double w = boost::math::ibeta_inv(0.5 * n, beta + 1.0, u);
    return m.w().sigma() * std::sqrt(w);
  }
  const double w = boost::math::ibeta_inv(0.5 * n, beta - 0.5 * n, u);
  return std::sqrt(w / (m.w().alpha() * (1.0 - w)));
}

}  // namespace

std::pair<Vec, Vec> DensityModel::bounding_box(double tail) const {
  const int n = dim();
  if (w_.kind() == WKind::Custom) return {w_.custom_w()->lo, w_.custom_w()->hi};
  if (w_.kind() == WKind::QuadraticBall) {
    return {Vec::Constant(n, -w_.sigma()), Vec::Constant(n, w_.sigma())};
  }
  // Bisection on the radial CDF.
  double lo = 0.0, hi = 1.0;
  while (1.0 - radial_cdf(*this, hi) > tail) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (1.0 - radial_cdf(*this, mid) > tail) lo = mid;
    else hi = mid;
  }
  return {Vec::Constant(n, -hi), Vec::Constant(n, hi)};
}

Grid1D DensityModel::grid(std::size_t cells) const {
  if (dim() != 1) throw DomainError("DensityModel::grid: one-dimensional models only");
  switch (w_.kind()) {
    case WKind::QuadraticBall: return Grid1D::linear(-w_.sigma(), w_.sigma(), cells);
    case WKind::QuadraticCauchy: {
      const double spread = std::max(0.5 * kp_.beta(), 1.0) * w_.alpha();
      return Grid1D::tangent(0.0, 1.0 / std::sqrt(spread), cells);
    }
    default: return Grid1D::linear(w_.custom_w()->lo[0], w_.custom_w()->hi[0], cells);
  }
}

DensityModel normalize(const WSpec& w, const KappaParam& kp, bool rescale, std::string id) {
  const int n = w.dim();
  const double beta = kp.beta();
  double z = 0.0;
  switch (w.kind()) {
    case WKind::QuadraticBall:
      if (kp.regime() != Case::One) throw DomainError("normalize: the ball family is Case One (kappa > 0)");
      z = std::pow(w.scale(), beta) * closed_form_constant(Family::BallBeta, n, beta, w.sigma());
      break;
    case WKind::QuadraticCauchy:
      if (kp.regime() != Case::Two) throw DomainError("normalize: the Cauchy family is Case Two (kappa < 0)");
      if (!(2.0 * beta > n)) throw DivergenceError("normalize: int W^{1/kappa} diverges (needs 2 beta > n)");
      z = std::pow(w.scale(), -beta) * std::pow(w.alpha(), -0.5 * n) *
          closed_form_constant(Family::Cauchy, n, beta);
      break;
    case WKind::Custom:
      z = custom_constant(w, kp);
      break;
  }
  if (kp.regime() == Case::Two && beta < n)
    throw DomainError("normalize: Case Two needs beta >= n (kappa >= -1/n)");
  if (!(z > 0.0) || !std::isfinite(z)) throw DivergenceError("normalize: normalizing constant is not finite and positive");
  if (id.empty()) {
    std::ostringstream os;
    os.precision(17);
    switch (w.kind()) {
      case WKind::QuadraticBall: os << "ball:sigma=" << w.sigma() << ",beta=" << beta << ",n=" << n; break;
      case WKind::QuadraticCauchy:
        os << "cauchy:beta=" << beta << ",n=" << n;
        if (w.alpha() != 1.0) os << ",alpha=" << w.alpha();
        break;
      default: os << "custom:" << w.custom_w()->label; break;
    }
    id = os.str();
  }
  if (!rescale) return DensityModel(kp, w, z, false, std::move(id));
  return DensityModel(kp, w.scaled(std::pow(z, -kp.kappa())), z, true, std::move(id));
}

// ---------------------------------------------------------------------------
// Model ids

namespace {

std::map<std::string, std::string> parse_pairs(const std::string& text, char sep) {
  std::map<std::string, std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item.erase(0, item.find_first_not_of(" \t\r"));
    item.erase(item.find_last_not_of(" \t\r") + 1);
    if (item.empty() || item[0] == '#') continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw DomainError("model id: expected key=value, got '" + item + "'");
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

double take_number(std::map<std::string, std::string>& kv, const std::string& key, double fallback,
                   bool required) {
  auto it = kv.find(key);
  if (it == kv.end()) {
    if (required) throw DomainError("model id: missing '" + key + "'");
    return fallback;
  }
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(it->second, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != it->second.size()) throw DomainError("model id: bad number for '" + key + "'");
  kv.erase(it);
  return v;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) out.push_back(std::stod(item));
  return out;
}

DensityModel custom_from_file(const std::string& path, const std::string& id) {
  std::ifstream in(path);
  if (!in) throw DomainError("model id: cannot open custom file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  auto kv = parse_pairs(buf.str(), '\n');
  const int n = static_cast<int>(take_number(kv, "n", 1, false));
  if (n != 1) throw DomainError("custom file: polynomial W is supported for n=1 only");
  const double kappa = take_number(kv, "kappa", 0, true);
  const double lo = take_number(kv, "lo", 0, true);
  const double hi = take_number(kv, "hi", 0, true);
  auto cit = kv.find("coeffs");
  if (cit == kv.end()) throw DomainError("custom file: missing 'coeffs' (a0;a1;a2;...)");
  const std::vector<double> c = parse_list(cit->second);
  kv.erase(cit);
  if (!kv.empty()) throw DomainError("custom file: unknown key '" + kv.begin()->first + "'");

  auto eval = [c](double x, int deriv) {
    double acc = 0.0, xp = 1.0;
    for (std::size_t k = static_cast<std::size_t>(deriv); k < c.size(); ++k) {
      double factor = 1.0;
      for (int j = 0; j < deriv; ++j) factor *= static_cast<double>(k - static_cast<std::size_t>(j));
      acc += factor * c[k] * xp;
      xp *= x;
    }
    return acc;
  };
  CustomW cw;
  cw.value = [eval](const Vec& x) { return eval(x[0], 0); };
  cw.gradient = [eval](const Vec& x) { return Vec::Constant(1, eval(x[0], 1)); };
  cw.hessian = [eval](const Vec& x) { return Mat::Constant(1, 1, eval(x[0], 2)); };
  cw.lo = Vec::Constant(1, lo);
  cw.hi = Vec::Constant(1, hi);
  cw.label = path;
  return normalize(WSpec::custom(1, std::move(cw)), KappaParam::from_kappa(kappa), true, id);
}

}  // namespace

DensityModel model_from_id(const std::string& id) {
  const auto colon = id.find(':');
  if (colon == std::string::npos) throw DomainError("model id: expected '<family>:<params>', got '" + id + "'");
  const std::string family = id.substr(0, colon);
  const std::string rest = id.substr(colon + 1);
  if (family == "custom") return custom_from_file(rest, id);
  auto kv = parse_pairs(rest, ',');
  const int n = static_cast<int>(take_number(kv, "n", 1, false));
  const double beta = take_number(kv, "beta", 0, true);
  if (family == "ball") {
    const double sigma = take_number(kv, "sigma", 1.0, false);
    if (!kv.empty()) throw DomainError("model id: unknown key '" + kv.begin()->first + "'");
    return normalize(WSpec::ball(n, sigma), KappaParam::case_one(beta), true, id);
  }
  if (family == "cauchy") {
    const double alpha = take_number(kv, "alpha", 1.0, false);
    if (!kv.empty()) throw DomainError("model id: unknown key '" + kv.begin()->first + "'");
    return normalize(WSpec::cauchy(n, alpha), KappaParam::case_two(beta), true, id);
  }
  throw DomainError("model id: unknown family '" + family + "'");
}

// ---------------------------------------------------------------------------
// Discrete measures

void DiscreteMeasure::validate() const {
  if (points.size() != weights.size()) throw DomainError("DiscreteMeasure: points/weights size mismatch");
  if (weights.empty()) throw DomainError("DiscreteMeasure: empty measure");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw DomainError("DiscreteMeasure: negative or NaN weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("DiscreteMeasure: weights do not sum to one");
  for (const auto& p : points)
    if (p.size() != dim) throw DomainError("DiscreteMeasure: point of wrong dimension");
  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto less = [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(points[a].data(), points[a].data() + dim, points[b].data(),
                                        points[b].data() + dim);
  };
  std::sort(order.begin(), order.end(), less);
  for (std::size_t k = 1; k < order.size(); ++k)
    if (points[order[k]] == points[order[k - 1]]) throw DomainError("DiscreteMeasure: repeated point");
}

DiscreteMeasure make_measure(int dim, std::vector<Vec> points, std::vector<double> weights,
                             DiscreteMeasure::Kind kind) {
  DiscreteMeasure m;
  m.dim = dim;
  m.points = std::move(points);
  m.weights = std::move(weights);
  m.kind = kind;
  m.validate();
  return m;
}

namespace {

struct AxisCells {
  std::vector<Rule1D> cells;   // quadrature inside each cell
  std::vector<double> center;  // representative centre
};

AxisCells axis_cells(std::size_t count, double lo, double hi, bool tangent, double scale) {
  AxisCells ax;
  const Grid1D g = tangent ? Grid1D::tangent(0.0, scale, count) : Grid1D::linear(lo, hi, count);
  const auto& gl = gauss_legendre(6);
  const double half = 0.5 * g.h();
  for (std::size_t k = 0; k < count; ++k) {
    Rule1D r;
    const double mid = g.edge_s(k) + half;
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      const double s = mid + half * gl.nodes[q];
      r.x.push_back(g.x_of_s(s));
      r.w.push_back(half * gl.weights[q] * g.dx_ds(s));
    }
    ax.cells.push_back(std::move(r));
    ax.center.push_back(g.x_of_s(mid));
  }
  return ax;
}

}  // namespace

Discretization discretize(const std::function<double(const Vec&)>& pdf, int dim, const GridSpec& spec) {
  if (dim < 1 || dim > 3) throw DomainError("discretize: dimension must be 1, 2 or 3");
  if (spec.cells.empty()) throw DomainError("discretize: no cell counts");
  std::vector<AxisCells> axes;
  for (int d = 0; d < dim; ++d) {
    const std::size_t count = spec.cells.size() == 1 ? spec.cells[0] : spec.cells.at(static_cast<std::size_t>(d));
    if (count == 0) throw DomainError("discretize: zero cells on an axis");
    const double lo = spec.tangent ? 0.0 : spec.lo[d];
    const double hi = spec.tangent ? 1.0 : spec.hi[d];
    axes.push_back(axis_cells(count, lo, hi, spec.tangent, spec.tangent_scale));
  }
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.center.size();

  std::vector<Vec> points;
  std::vector<double> masses;
  points.reserve(total);
  masses.reserve(total);
  double captured = 0.0;
  std::vector<std::size_t> idx(static_cast<std::size_t>(dim));
  Vec x(dim);
  for (std::size_t c = 0; c < total; ++c) {
    std::size_t rem = c;
    for (int d = dim - 1; d >= 0; --d) {
      const auto n = axes[static_cast<std::size_t>(d)].center.size();
      idx[static_cast<std::size_t>(d)] = rem % n;
      rem /= n;
    }
    // Tensor GL inside the cell.
    std::size_t nodes = 1;
    for (int d = 0; d < dim; ++d) nodes *= axes[static_cast<std::size_t>(d)].cells[idx[static_cast<std::size_t>(d)]].x.size();
    double mass = 0.0;
    Vec moment = Vec::Zero(dim);
    for (std::size_t q = 0; q < nodes; ++q) {
      std::size_t r = q;
      double w = 1.0;
      for (int d = dim - 1; d >= 0; --d) {
        const auto& cell = axes[static_cast<std::size_t>(d)].cells[idx[static_cast<std::size_t>(d)]];
        const std::size_t j = r % cell.x.size();
        r /= cell.x.size();
        x[d] = cell.x[j];
        w *= cell.w[j];
      }
      const double v = w * pdf(x);
      mass += v;
      moment += v * x;
    }
    Vec point(dim);
    for (int d = 0; d < dim; ++d) point[d] = axes[static_cast<std::size_t>(d)].center[idx[static_cast<std::size_t>(d)]];
    if (spec.placement == GridSpec::Placement::Barycenter && mass > 0.0) point = moment / mass;
    points.push_back(std::move(point));
    masses.push_back(std::max(mass, 0.0));
    captured += std::max(mass, 0.0);
  }
  if (!(captured > 0.0)) throw GridError("discretize: grid captures no mass");
  if (captured < spec.min_captured_mass) {
    std::ostringstream os;
    os.precision(10);
    os << "discretize: grid captures mass " << captured << " < required " << spec.min_captured_mass;
    throw GridError(os.str());
  }
  for (double& m : masses) m /= captured;
  // Renormalization can leave the sum one ulp-scale off; fold into the heaviest atom.
  double sum = 0.0;
  for (double m : masses) sum += m;
  auto heaviest = std::max_element(masses.begin(), masses.end());
  *heaviest += 1.0 - sum;

  Discretization out;
  out.measure = make_measure(dim, std::move(points), std::move(masses), DiscreteMeasure::Kind::Grid);
  out.captured_mass = captured;
  return out;
}

Discretization discretize(const DensityModel& m, const GridSpec& spec) {
  return discretize([&m](const Vec& x) { return m.pdf(x); }, m.dim(), spec);
}

GridSpec default_grid_spec(const DensityModel& m, std::size_t cells_per_axis, double tail) {
  GridSpec spec;
  spec.cells = {cells_per_axis};
  auto [lo, hi] = m.bounding_box(tail);
  spec.lo = lo;
  spec.hi = hi;
  spec.min_captured_mass = 1.0 - std::max(2.0 * tail, 1e-12);
  return spec;
}

// ---------------------------------------------------------------------------
// Sampling

std::vector<Vec> sample(const DensityModel& m, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw DomainError("sample: count must be at least 1");
  Rng rng(seed);
  std::vector<Vec> out;
  out.reserve(count);
  const int n = m.dim();
  if (n == 1) {
    const Grid1D g = m.grid(std::size_t{1} << 14);
    const auto& gl = gauss_legendre(4);
    std::vector<double> cdf(g.cells() + 1, 0.0);
    const double half = 0.5 * g.h();
    for (std::size_t k = 0; k < g.cells(); ++k) {
      const double mid = g.edge_s(k) + half;
      double part = 0.0;
      for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
        const double s = mid + half * gl.nodes[q];
        part += gl.weights[q] * m.pdf(g.x_of_s(s)) * g.dx_ds(s);
      }
      cdf[k + 1] = cdf[k] + half * part;
    }
    const double total = cdf.back();
    for (std::size_t i = 0; i < count; ++i) {
      const double u = rng.uniform_open() * total;
      const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      std::size_t k = static_cast<std::size_t>(std::distance(cdf.begin(), it));
      k = std::clamp<std::size_t>(k, 1, g.cells()) - 1;
      const double width = cdf[k + 1] - cdf[k];
      const double frac = width > 0.0 ? (u - cdf[k]) / width : 0.5;
      const double s = g.edge_s(k) + std::clamp(frac, 1e-12, 1.0 - 1e-12) * g.h();
      out.push_back(Vec::Constant(1, g.x_of_s(s)));
    }
    return out;
  }
  if (!m.w().is_radial()) throw DomainError("sample: n >= 2 sampling needs a radial family");
  for (std::size_t i = 0; i < count; ++i) {
    Vec dir(n);
    double norm = 0.0;
    do {
      for (int d = 0; d < n; ++d) dir[d] = rng.normal();
      norm = dir.norm();
    } while (norm < 1e-12);
    const double r = radial_quantile(m, rng.uniform_open());
    out.push_back(r * dir / norm);
  }
  return out;
}

ConcavityResult midpoint_concavity_check(const DensityModel& m, std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw DomainError("midpoint_concavity_check: trials must be at least 1");
  const auto pts = sample(m, 2 * trials, seed);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const double kappa = m.kp().kappa();
  ConcavityResult res;
  for (std::size_t k = 0; k < trials; ++k) {
    const Vec& x = pts[2 * k];
    const Vec& y = pts[2 * k + 1];
    const double t = rng.uniform_open();
    const double px = m.pdf(x), py = m.pdf(y);
    if (!(px > 0.0) || !(py > 0.0)) continue;
    const Vec z = t * x + (1.0 - t) * y;
    const double lhs = m.pdf(z);
    const double mean = t * std::pow(px, kappa) + (1.0 - t) * std::pow(py, kappa);
    const double rhs = std::pow(mean, 1.0 / kappa);
    ++res.trials;
    if (lhs < rhs * (1.0 - 1e-10)) {
      res.ok = false;
      res.witness = ConcavityWitness{x, y, t, lhs, rhs};
      return res;
    }
  }
  return res;
}

}  // namespace kappaot
