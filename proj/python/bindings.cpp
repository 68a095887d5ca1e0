#include "sparse_anova/cli.hpp"
#include "sparse_anova/combinatorics.hpp"
#include "sparse_anova/errors.hpp"
#include "sparse_anova/extremal.hpp"
#include "sparse_anova/model.hpp"
#include "sparse_anova/risk.hpp"
#include "sparse_anova/selector.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace sparse_anova;

namespace {

py::dict profile_dict(const ExtremalProfile& p)
{
  py::list shells;
  for (std::size_t i = 0; i < p.shells.size(); ++i)
    shells.append(py::make_tuple(p.shells[i].norm2, p.shells[i].multiplicity, p.theta_sq[i], p.weights[i]));
  py::dict d;
  d["k"] = p.k;
  d["sigma"] = p.sigma;
  d["eps"] = p.epsilon;
  d["r"] = p.r;
  d["window"] = p.window;
  d["a_value"] = p.a_value;
  d["amplitude"] = p.amplitude;
  d["mu"] = p.mu;
  d["support_size"] = p.support_size();
  d["support_radius"] = p.support_radius();
  d["shells"] = shells;
  return d;
}

py::list report_rows(const RiskReport& r)
{
  py::list rows;
  for (const auto& row : r.rows) {
    py::dict d;
    d["d"] = row.d;
    d["k"] = row.k;
    d["aggregate"] = row.aggregate;
    d["alpha"] = row.alpha;
    d["label"] = row.label;
    d["beta"] = row.beta;
    d["err"] = row.err;
    d["err_sd"] = row.err_sd;
    d["false_pos"] = row.false_pos;
    d["false_neg"] = row.false_neg;
    d["J"] = row.J;
    d["seed"] = row.seed;
    d["sampler"] = row.sampler;
    d["m_hat"] = row.m_hat;
    rows.append(d);
  }
  return rows;
}

SimulationOptions options(const std::string& sampler, int threads)
{
  SimulationOptions o;
  o.sampler = parse_sampler(sampler);
  o.threads = threads;
  return o;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
  m.doc() = "Sparse ANOVA component selection: extremal sequences, selectors and risk experiments";

  static py::exception<Error> error(m, "Error", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p)
        std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  m.def("binomial", &binomial, py::arg("d"), py::arg("k"));
  m.def("log_binomial", &log_binomial, py::arg("d"), py::arg("k"));
  m.def(
    "enumerate_frequencies",
    [](int k, double radius, std::optional<int> window) {
      std::vector<std::vector<int>> out;
      for (const auto& l : enumerate_frequencies(k, radius, window))
        out.emplace_back(l.entries().begin(), l.entries().end());
      return out;
    },
    py::arg("k"), py::arg("radius"), py::arg("window") = py::none());

  m.def("max_radius", &max_radius, py::arg("k"), py::arg("sigma"));
  m.def(
    "solve_extremal",
    [](int k, double sigma, double eps, double r, std::optional<int> window) {
      return profile_dict(solve_extremal(k, sigma, eps, r, window));
    },
    py::arg("k"), py::arg("sigma"), py::arg("eps"), py::arg("r"), py::arg("window") = py::none());
  m.def(
    "a_value", [](int k, double sigma, double eps, double r, std::optional<int> window) {
      return a_value(k, sigma, eps, r, window);
    },
    py::arg("k"), py::arg("sigma"), py::arg("eps"), py::arg("r"), py::arg("window") = py::none());
  m.def(
    "a_asymptotic", [](int k, double sigma, double eps, double r) { return a_asymptotic(k, sigma, eps, r); },
    py::arg("k"), py::arg("sigma"), py::arg("eps"), py::arg("r"));
  m.def(
    "solve_r_star",
    [](int k, double sigma, double eps, double target, std::optional<int> window) {
      return solve_r_star(k, sigma, eps, target, window);
    },
    py::arg("k"), py::arg("sigma"), py::arg("eps"), py::arg("target"), py::arg("window") = py::none());

  py::class_<SelectorConfig>(m, "SelectorConfig")
    .def(py::init<>())
    .def_readwrite("b", &SelectorConfig::b)
    .def_readwrite("B", &SelectorConfig::B)
    .def_readwrite("M", &SelectorConfig::M)
    .def_property(
      "lepski", [](const SelectorConfig& c) { return to_string(c.scan); },
      [](SelectorConfig& c, const std::string& s) { c.scan = parse_lepski_scan(s); })
    .def_property(
      "regime", [](const SelectorConfig& c) { return to_string(c.regime); },
      [](SelectorConfig& c, const std::string& s) { c.regime = parse_regime(s); })
    .def("grid", &SelectorConfig::grid);

  m.def(
    "thresholds_and_radii",
    [](int d, int k, double sigma, double eps, const SelectorConfig& config, std::optional<int> window) {
      const NodeGrid g = thresholds_and_radii(d, k, sigma, eps, config, window);
      py::list nodes;
      for (const auto& n : g.nodes) {
        py::dict e;
        e["m"] = n.m;
        e["beta"] = n.beta;
        e["target"] = n.target;
        e["r_star"] = n.r_star;
        e["threshold"] = n.threshold;
        e["v"] = n.v;
        e["support_size"] = n.profile.support_size();
        nodes.append(e);
      }
      py::dict out;
      out["epsilon"] = g.epsilon;
      out["tau"] = g.tau;
      out["nodes"] = nodes;
      return out;
    },
    py::arg("d"), py::arg("k"), py::arg("sigma"), py::arg("eps"), py::arg("config") = SelectorConfig{},
    py::arg("window") = py::none());
  m.def(
    "lepski_index",
    [](const std::vector<std::vector<std::uint8_t>>& per_node, const std::vector<double>& v,
       const std::string& scan) { return lepski_index(per_node, v, parse_lepski_scan(scan)); },
    py::arg("per_node"), py::arg("v"), py::arg("scan") = "sequential");

  m.def(
    "table2",
    [](int k, int d, const std::vector<double>& alphas, int J, std::uint64_t seed, double sigma, double eps,
       const SelectorConfig& config, const std::string& sampler, int threads) {
      const ModelInstance inst = design_instance(k, d, sigma, eps);
      RiskReport r;
      {
        py::gil_scoped_release release;
        r = estimate_risk_sweep(inst, design_scaled_subset(k), alphas, config, J, seed, options(sampler, threads));
      }
      return report_rows(r);
    },
    py::arg("k"), py::arg("d"), py::arg("alphas"), py::arg("J") = 20, py::arg("seed") = 7, py::arg("sigma") = 1.0,
    py::arg("eps") = 1e-4, py::arg("config") = SelectorConfig{}, py::arg("sampler") = "auto", py::arg("threads") = 0);
  m.def(
    "dichotomy",
    [](int k, double sigma, double eps, int d, double beta, double margin, int J, std::uint64_t seed,
       const SelectorConfig& config, const std::string& sampler, int threads) {
      RiskReport r;
      {
        py::gil_scoped_release release;
        r = boundary_dichotomy_experiment(k, sigma, eps, d, beta, margin, J, seed, config, options(sampler, threads));
      }
      return report_rows(r);
    },
    py::arg("k"), py::arg("sigma"), py::arg("eps"), py::arg("d"), py::arg("beta"), py::arg("margin"),
    py::arg("J") = 50, py::arg("seed") = 7, py::arg("config") = SelectorConfig{}, py::arg("sampler") = "auto",
    py::arg("threads") = 0);

  m.def(
    "phase_classify", [](double beta, double gamma) { return to_string(phase_classify(beta, gamma)); },
    py::arg("beta"), py::arg("gamma"));
  m.def(
    "boundary_curves",
    [](const std::vector<double>& betas) {
      std::vector<std::tuple<double, double, double>> out;
      for (const auto& p : boundary_curves(betas))
        out.emplace_back(p.beta, p.gamma_almost_full, p.gamma_exact);
      return out;
    },
    py::arg("betas"));

  m.def(
    "run_cli",
    [](const std::vector<std::string>& args) {
      std::ostringstream out, err;
      int code;
      {
        py::gil_scoped_release release;
        code = cli::run(args, out, err);
      }
      return py::make_tuple(code, out.str(), err.str());
    },
    py::arg("args"), "Run one CLI subcommand; returns (exit_code, stdout, stderr).");

#ifdef VERSION_INFO
#define SPARSE_ANOVA_STR(x) #x
#define SPARSE_ANOVA_XSTR(x) SPARSE_ANOVA_STR(x)
  m.attr("__version__") = SPARSE_ANOVA_XSTR(VERSION_INFO);
#else
  m.attr("__version__") = "dev";
#endif
}
