#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "kappaot/inequalities.hpp"
#include "kappaot/poincare.hpp"
#include "kappaot/suites.hpp"
#include "kappaot/transport.hpp"

namespace py = pybind11;
using namespace kappaot;

namespace {

py::dict as_dict(const InequalityCase& c) {
  py::dict d;
  d["suite"] = c.suite;
  d["case_id"] = c.case_id;
  d["model"] = c.model;
  d["params"] = c.params;
  d["lhs"] = c.lhs;
  d["rhs"] = c.rhs;
  d["margin"] = c.margin;
  d["tol"] = c.tol;
  d["pass"] = c.pass;
  d["seed"] = c.seed;
  d["note"] = c.note;
  return d;
}

py::dict as_dict(const BoundResult& b) {
  py::dict d;
  d["lhs"] = b.lhs;
  d["rhs"] = b.rhs;
  d["margin"] = b.margin;
  d["std_error"] = b.std_error;
  return d;
}

DiscreteMeasure line(const std::vector<double>& xs, const std::vector<double>& ws) {
  std::vector<Vec> pts;
  pts.reserve(xs.size());
  for (double x : xs) pts.push_back(Vec::Constant(1, x));
  return make_measure(1, std::move(pts), ws);
}

}  // namespace

PYBIND11_MODULE(_kappaot, mod) {
  mod.doc() = "Transport-entropy inequalities for kappa-concave measures";
  mod.attr("__version__") = KAPPAOT_VERSION;

  auto error = py::register_exception<Error>(mod, "Error");
  py::register_exception<DomainError>(mod, "DomainError", error.ptr());
  py::register_exception<GridError>(mod, "GridError", error.ptr());
  py::register_exception<ConfigError>(mod, "ConfigError", error.ptr());

  py::class_<DensityModel>(mod, "DensityModel")
      .def_property_readonly("id", &DensityModel::id)
      .def_property_readonly("dim", &DensityModel::dim)
      .def_property_readonly("z", &DensityModel::z)
      .def_property_readonly("kappa", [](const DensityModel& m) { return m.kp().kappa(); })
      .def_property_readonly("beta", [](const DensityModel& m) { return m.kp().beta(); })
      .def("pdf", py::overload_cast<double>(&DensityModel::pdf, py::const_), py::arg("x"))
      .def("pdf", py::overload_cast<const Vec&>(&DensityModel::pdf, py::const_), py::arg("x"))
      .def("__repr__", [](const DensityModel& m) { return "DensityModel('" + m.id() + "')"; });

  mod.def("model", &model_from_id, py::arg("id"), "Build a model from an id such as 'cauchy:beta=2,n=1'.");

  mod.def("F", &F, py::arg("t"));
  mod.def("G_kappa", [](const Mat& M, double kappa) {
    return G_kappa(SymmetricMatrixSample::from_matrix(M, kappa > 0 ? MatrixDomain::EigGtMinusOne : MatrixDomain::Nonnegative),
                   kappa);
  }, py::arg("M"), py::arg("kappa"));
  mod.def("lemma_case1_bound", [](const Mat& M, double beta) {
    return as_dict(lemma_case1_bound(SymmetricMatrixSample::from_matrix(M, MatrixDomain::EigGtMinusOne), beta));
  }, py::arg("M"), py::arg("beta"));
  mod.def("lemma_case2_bound", [](const Mat& M, double beta) {
    return as_dict(lemma_case2_bound(SymmetricMatrixSample::from_matrix(M, MatrixDomain::Nonnegative), beta));
  }, py::arg("M"), py::arg("beta"));
  mod.def("scalar_log_bound", [](double t) { return scalar_log_bound(t); }, py::arg("t"));

  mod.def("solve_transportation", [](const std::vector<double>& a, const std::vector<double>& b, const Mat& cost) {
    if (static_cast<std::size_t>(cost.rows()) != a.size() || static_cast<std::size_t>(cost.cols()) != b.size())
      throw DomainError("solve_transportation: cost shape does not match the marginals");
    std::vector<double> flat(a.size() * b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) flat[i * b.size() + j] = cost(i, j);
    TransportPlan plan;
    {
      py::gil_scoped_release nogil;
      plan = solve_transportation(a, b, flat);
    }
    py::dict d;
    d["total_cost"] = plan.total_cost;
    d["plan"] = plan.dense();
    d["f"] = plan.f;
    d["g"] = plan.g;
    d["dual_gap"] = plan.dual_gap;
    d["marginal_error"] = plan.marginal_error;
    return d;
  }, py::arg("a"), py::arg("b"), py::arg("cost"), "Exact transportation LP; returns cost, dense plan and potentials.");
  mod.def("wasserstein_p", [](const std::vector<double>& xs, const std::vector<double>& ws, const std::vector<double>& ys,
                              const std::vector<double>& vs, double p, bool quantile) {
    const DiscreteMeasure mu = line(xs, ws), nu = line(ys, vs);
    return quantile ? wasserstein_p_quantile(mu, nu, p) : wasserstein_p(mu, nu, p);
  }, py::arg("x"), py::arg("wx"), py::arg("y"), py::arg("wy"), py::arg("p") = 2.0, py::arg("quantile") = false,
     "p-th power of W_p between weighted point sets on the line.");

  mod.def("verify_thm1", [](const std::string& id, const std::string& kind, double eps, std::size_t grid) {
    const DensityModel m = model_from_id(id);
    py::gil_scoped_release nogil;
    if (m.dim() == 1) return verify_thm1(m, make_perturbation(m, kind, eps), grid);
    return verify_thm1(m, make_perturbation_nd(m, kind, eps), grid);
  }, py::arg("model"), py::arg("pert") = "bump", py::arg("eps") = 0.1, py::arg("grid") = 4096);
  mod.def("decomposition_residual", [](const std::string& id, const std::string& kind, double eps, std::size_t grid) {
    const DensityModel m = model_from_id(id);
    DecompositionStudy s;
    {
      py::gil_scoped_release nogil;
      s = decomposition_study(m, make_perturbation(m, kind, eps), grid);
    }
    py::dict d;
    d["coarse"] = s.coarse.residual;
    d["fine"] = s.fine.residual;
    d["ratio"] = s.ratio;
    d["pass"] = s.pass;
    return d;
  }, py::arg("model"), py::arg("pert") = "even", py::arg("eps") = 0.1, py::arg("grid") = 4096);
  mod.def("entropy_linearization", [](const std::string& id, const std::string& kind) {
    const DensityModel m = model_from_id(id);
    Linearization l;
    {
      py::gil_scoped_release nogil;
      l = entropy_linearization(m, make_perturbation(m, kind, 0.0));
    }
    py::dict d;
    d["eps"] = l.eps;
    d["ratios"] = l.ratios;
    d["extrapolated"] = l.extrapolated;
    d["target"] = l.target;
    d["rel_error"] = l.rel_error;
    return d;
  }, py::arg("model"), py::arg("pert") = "ratio");
  mod.def("verify_bl", [](const std::string& id, int degree) {
    const DensityModel m = model_from_id(id);
    const PolyG p = orthogonal_polynomial(m, degree, false);
    return verify_bl(m, [&](double x) { return p.value(x); }, [&](double x) { return p.derivative(x); }, degree);
  }, py::arg("model"), py::arg("degree"), "Brascamp-Lieb sides for the orthogonalized polynomial of this degree.");

  mod.def("cauchy_chain", [](const std::string& id, double c_kappa) {
    const DensityModel m = model_from_id(id);
    ChainResult r;
    {
      py::gil_scoped_release nogil;
      r = cauchy_chain(m, c_kappa);
    }
    py::dict d;
    d["h"] = r.estimate.h;
    d["validated"] = r.estimate.validated;
    d["worst_margin"] = r.estimate.worst_margin;
    d["c_kappa"] = r.c_kappa;
    d["m"] = r.bound.m;
    d["m1"] = r.bound.m1;
    d["family_version"] = r.estimate.family_version;
    d["family_hash"] = r.estimate.family_hash;
    return d;
  }, py::arg("model"), py::arg("c_kappa") = 0.0);
  mod.def("laplace_ratio", [](int n, double beta) { return laplace_In(n, beta).ratio; }, py::arg("n"), py::arg("beta"));

  mod.def("run_suite", [](const std::string& suite, std::optional<std::uint64_t> seed, const std::vector<std::string>& models,
                          std::size_t grid, int jobs) {
    SuiteConfig cfg;
    cfg.suite = suite;
    cfg.seed = seed;
    cfg.models = models;
    cfg.grid = grid;
    cfg.jobs = jobs;
    cfg.validate();
    std::ostringstream out;
    {
      py::gil_scoped_release nogil;
      emit_table(run(cfg), "json", out);
    }
    return out.str();
  }, py::arg("suite"), py::arg("seed") = py::none(), py::arg("models") = std::vector<std::string>{},
     py::arg("grid") = 4096, py::arg("jobs") = 1, "Run a verification suite; returns the JSON report.");

  py::class_<InequalityCase>(mod, "InequalityCase")
      .def_readonly("suite", &InequalityCase::suite)
      .def_readonly("case_id", &InequalityCase::case_id)
      .def_readonly("model", &InequalityCase::model)
      .def_readonly("lhs", &InequalityCase::lhs)
      .def_readonly("rhs", &InequalityCase::rhs)
      .def_readonly("margin", &InequalityCase::margin)
      .def_readonly("tol", &InequalityCase::tol)
      .def_readonly("passed", &InequalityCase::pass)
      .def("to_dict", [](const InequalityCase& c) { return as_dict(c); });
}
