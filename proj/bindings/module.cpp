#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

#include "mshom/analytic.hpp"
#include "mshom/estimator.hpp"
#include "mshom/harness.hpp"
#include "mshom/model.hpp"
#include "mshom/poisson.hpp"
#include "mshom/sdesim.hpp"
#include "mshom/stats.hpp"

namespace py = pybind11;
using namespace mshom;

namespace {

py::dict cell_constants_py(double alpha, double sigma, double eps, double tol) {
    const ModelSpec spec = langevin_model(alpha, sigma, eps);
    const CellConstants c = compute_cell_constants(spec, tol);
    py::dict d;
    d["Z_plus"] = c.Z_plus;
    d["Z_minus"] = c.Z_minus;
    d["K"] = c.K;
    d["Z"] = c.Z;
    d["Z_eps"] = c.Z_eps;
    return d;
}

py::dict simulate_py(double alpha, double sigma, double eps, double x0, double T, double dt,
                     std::uint64_t seed, std::uint64_t replicate_id) {
    const ModelSpec spec = langevin_model(alpha, sigma, eps, x0);
    PathSimConfig cfg;
    cfg.dt = dt;
    cfg.T = T;
    cfg.seed = seed;
    cfg.replicate_id = replicate_id;
    const ErgodicAccumulator acc = simulate_accumulate(spec, cfg, {});
    py::dict d;
    d["c_hat"] = acc.c_hat();
    d["elapsed"] = acc.elapsed;
    d["last_state"] = acc.last_state;
    d["steps"] = acc.steps;
    return d;
}

py::dict poisson_cos_py(double alpha, double sigma, double eps, bool limit_channel) {
    const ModelSpec spec = langevin_model(alpha, sigma, eps);
    const CellConstants cell = compute_cell_constants(spec, 1e-10);
    const HomogenizedSpec limit = homogenize_langevin(spec, cell.K);
    const double L = working_half_width(spec);
    const double h = limit_channel ? 2.5e-4 : std::min(eps * eps / 20.0, eps / 150.0);
    const DensityTable density = invariant_density(spec, limit, make_symmetric_grid(L, h));
    const auto sol = limit_channel ? solve_poisson_characteristic(density, generator_view(limit))
                                   : solve_poisson_characteristic(density, generator_view(spec));
    py::dict d;
    d["tau_sq_cos"] = sol.re.tau_sq;
    d["tau_sq_total"] = sol.tau_sq;
    d["dirichlet_gap"] = sol.re.dirichlet_gap;
    d["max_phi_prime"] = sol.re.phi_prime_sup;
    return d;
}

py::dict first_passage_py(double theta, double sigma_eff, double x0, double target, double T,
                          double dt, std::uint64_t seed, std::uint64_t replicate_id) {
    const double coeff = std::sqrt(2.0 * sigma_eff);
    const ModelSpec ou = general_model([theta](double x) { return -theta * x; },
                                       [](double) { return 0.0; }, 1.0,
                                       [coeff](double) { return coeff; }, 1.0, x0);
    PathSimConfig cfg;
    cfg.dt = dt;
    cfg.T = T;
    cfg.seed = seed;
    cfg.replicate_id = replicate_id;
    const FirstPassageRecord rec = first_passage(ou, cfg, target);
    py::dict d;
    d["hit_time"] = rec.hit_time;
    d["censored"] = rec.censored;
    d["steps"] = rec.steps;
    return d;
}

py::dict run_experiment_py(const std::string& config_text) {
    ExperimentConfig cfg = ExperimentConfig::parse_text(config_text);
    const ExperimentReport rep = run(cfg);
    py::dict d;
    d["experiment"] = rep.experiment;
    d["columns"] = rep.columns;
    d["rows"] = rep.rows;
    d["passed"] = rep.passed();
    d["total_steps"] = rep.total_steps;
    py::list ds;
    for (const auto& dec : rep.decisions) {
        py::dict e;
        e["name"] = dec.name;
        e["value"] = dec.value;
        e["threshold"] = dec.threshold;
        e["pass"] = dec.pass;
        ds.append(e);
    }
    d["decisions"] = ds;
    return d;
}

} // namespace

PYBIND11_MODULE(_mshom, m) {
    m.doc() = "multiscale diffusion homogenization: analytics, simulation, estimation";

    m.def("bessel_series", &bessel_series, py::arg("inv_sigma"), py::arg("tol") = 1e-14,
          "period average of exp(cos(y)/sigma) via its power series");
    m.def("cell_constants", &cell_constants_py, py::arg("alpha"), py::arg("sigma"), py::arg("eps"),
          py::arg("tol") = 1e-10);
    m.def("char_fn_mu", &char_fn_mu, py::arg("theta"), py::arg("sigma_eff"));
    m.def(
        "drift_eps",
        [](double alpha, double sigma, double eps, double x) {
            return drift_eps(langevin_model(alpha, sigma, eps), x);
        },
        py::arg("alpha"), py::arg("sigma"), py::arg("eps"), py::arg("x"));
    m.def(
        "mde_estimate",
        [](std::complex<double> c_hat, double sigma_eff, double theta_min, double theta_max) {
            EstimatorConfig cfg;
            cfg.sigma_eff = sigma_eff;
            cfg.theta_min = theta_min;
            cfg.theta_max = theta_max;
            const MdeResult r = mde_estimate(c_hat, cfg);
            return py::make_tuple(r.theta_hat, r.boundary);
        },
        py::arg("c_hat"), py::arg("sigma_eff"), py::arg("theta_min") = 0.01,
        py::arg("theta_max") = 10.0);
    m.def(
        "delta_method_std",
        [](double theta0, double sigma_eff, double tau) {
            EstimatorConfig cfg;
            cfg.sigma_eff = sigma_eff;
            return delta_method_std(theta0, cfg, tau);
        },
        py::arg("theta0"), py::arg("sigma_eff"), py::arg("tau"));
    m.def("ks_statistic", [](std::vector<double> v) { return ks_statistic(std::move(v)); },
          py::arg("sample"));
    m.def("simulate", &simulate_py, py::arg("alpha"), py::arg("sigma"), py::arg("eps"),
          py::arg("x0"), py::arg("T"), py::arg("dt"), py::arg("seed"), py::arg("replicate_id"),
          "Euler-Maruyama replicate; returns the time-averaged e^{iX} channel");
    m.def("poisson_cos", &poisson_cos_py, py::arg("alpha"), py::arg("sigma"), py::arg("eps"),
          py::arg("limit_channel") = false);
    m.def("first_passage_ou", &first_passage_py, py::arg("theta"), py::arg("sigma_eff"),
          py::arg("x0"), py::arg("target"), py::arg("T"), py::arg("dt"), py::arg("seed"),
          py::arg("replicate_id"));
    m.def("run_experiment", &run_experiment_py, py::arg("config_text"),
          "run a harness experiment from config text and return its summary");
}
