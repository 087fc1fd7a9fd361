#include "mshom/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mshom/analytic.hpp"
#include "mshom/estimator.hpp"
#include "mshom/model.hpp"
#include "mshom/poisson.hpp"
#include "mshom/sdesim.hpp"
#include "mshom/stats.hpp"

namespace mshom {

const char* const kKnownExperiments[7] = {"coeff", "met", "clt", "estimate",
                                          "tail", "poisson", "hitting"};

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "experiment", "alpha", "sigma", "x0", "eps", "schedule_c", "schedule_eta", "t_fixed",
        "dt", "n_replicates", "base_seed", "workers", "quad_l", "quad_spacing", "quad_tol",
        "out_dir", "formats", "met_phi", "indicator_lo", "indicator_hi", "met_final_mse_max",
        "tail_delta", "tail_final_max", "clt_ks_max", "est_median_rel_max", "normality_ks_max",
        "hitting_sigmas", "estimate_mode", "theta_min", "theta_max", "projection_floor",
        "hit_from", "hit_to", "hit_dt", "hit_tmax", "hit_dt_check", "assume_s", "assume_gamma"};
    return keys;
}

struct RunContext {
    ExperimentConfig cfg;
    double alpha = 1.0;
    double sigma = 1.0;
    double x0 = 0.0;
    std::vector<double> eps_list;
    ScheduleConfig schedule;
    double t_fixed = 0.0;
    double dt_explicit = 0.0;
    int n_replicates = 50;
    std::uint64_t base_seed = 0;
    int workers = 2;
    double L = 6.0;
    double quad_tol = 1e-10;
    double assume_s = 1.0;
    double assume_gamma = 0.0;

    double horizon(double eps) const {
        return t_fixed > 0.0 ? t_fixed : schedule.horizon(eps);
    }
    double step_size(double eps) const {
        return dt_explicit > 0.0 ? dt_explicit : eps * eps / 20.0;
    }
};

RunContext make_context(const ExperimentConfig& cfg) {
    RunContext c;
    c.cfg = cfg;
    c.alpha = cfg.get_double("alpha", 1.0);
    c.sigma = cfg.get_double("sigma", 1.0);
    c.x0 = cfg.get_double("x0", 0.0);
    if (!(c.alpha > 0.0) || !(c.sigma > 0.0)) throw ConfigError("alpha and sigma must be positive");
    c.eps_list = cfg.get_list("eps", {0.2, 0.1, 0.05});
    if (c.eps_list.empty()) throw ConfigError("eps list must be nonempty");
    for (std::size_t i = 0; i < c.eps_list.size(); ++i) {
        if (!(c.eps_list[i] > 0.0)) throw ConfigError("eps values must be positive");
        if (i > 0 && !(c.eps_list[i] < c.eps_list[i - 1]))
            throw ConfigError("eps list must be strictly decreasing");
    }
    c.schedule.eps_values = c.eps_list;
    c.schedule.horizon_constant = cfg.get_double("schedule_c", 1.0);
    c.schedule.horizon_exponent = cfg.get_double("schedule_eta", 1.5);
    if (!(c.schedule.horizon_constant > 0.0)) throw ConfigError("schedule_c must be positive");
    c.t_fixed = cfg.get_double("t_fixed", 0.0);
    c.dt_explicit = cfg.get_double("dt", 0.0);
    c.n_replicates = cfg.get_int("n_replicates", 50);
    if (c.n_replicates < 1) throw ConfigError("n_replicates must be at least 1");
    c.base_seed = static_cast<std::uint64_t>(cfg.get_int("base_seed", 0));
    c.workers = cfg.get_int("workers", 2);
    if (c.workers < 1) throw ConfigError("workers must be at least 1");
    c.quad_tol = cfg.get_double("quad_tol", 1e-10);
    c.assume_s = cfg.get_double("assume_s", 1.0);
    c.assume_gamma = cfg.get_double("assume_gamma", 0.0);
    const ModelSpec probe = langevin_model(c.alpha, c.sigma, c.eps_list.front(), c.x0);
    const double auto_l = working_half_width(probe, c.assume_s);
    c.L = cfg.get_double("quad_l", 0.0) > 0.0 ? cfg.get_double("quad_l", 0.0) : auto_l;
    return c;
}

// Abort guard shared by the simulation experiments: the drift-dominance
// assumption must hold for the homogenized limit before any path is launched.
double checked_cell_factor(const RunContext& c) {
    const ModelSpec spec = langevin_model(c.alpha, c.sigma, c.eps_list.front(), c.x0);
    const CellConstants cell = compute_cell_constants(spec, c.quad_tol);
    const HomogenizedSpec limit = homogenize_langevin(spec, cell.K);
    const double gamma =
        c.assume_gamma > 0.0 ? c.assume_gamma : c.alpha * c.assume_s / (4.0 * c.sigma);
    const QuadratureGrid sweep = make_symmetric_grid(c.L, 1e-2);
    const AssumptionReport rep = check_assumption_clt(limit, c.assume_s, gamma, sweep);
    if (!rep.holds)
        throw std::runtime_error("assumption check failed, aborting experiment: " + rep.summary());
    return cell.K;
}

void add_decision(ExperimentReport& rep, const std::string& name, double value, double threshold,
                  const std::string& cmp) {
    Decision d;
    d.name = name;
    d.value = value;
    d.threshold = threshold;
    d.comparator = cmp;
    if (cmp == "<=")
        d.pass = value <= threshold;
    else if (cmp == "<")
        d.pass = value < threshold;
    else if (cmp == ">=")
        d.pass = value >= threshold;
    else
        throw std::logic_error("unknown comparator");
    rep.decisions.push_back(d);
}

QuadratureGrid poisson_grid(double L, double eps) {
    const double h = std::min(eps * eps / 20.0, eps / 150.0);
    return make_symmetric_grid(L, h);
}

QuadratureGrid limit_poisson_grid(double L) { return make_symmetric_grid(L, 2.5e-4); }

double tau_eps_cos_channel(const RunContext& c, double eps, double K) {
    const ModelSpec spec = langevin_model(c.alpha, c.sigma, eps, c.x0);
    const HomogenizedSpec limit = homogenize_langevin(spec, K);
    const DensityTable density = invariant_density(spec, limit, poisson_grid(c.L, eps));
    const auto sol = solve_poisson_characteristic(density, generator_view(spec));
    return std::sqrt(sol.re.tau_sq);
}

ExperimentReport run_coeff(const RunContext& c) {
    ExperimentReport rep;
    rep.experiment = "coeff";
    rep.columns = {"eps", "K", "Z_plus", "Z_minus", "Z", "Z_eps"};
    double dual_route_gap = 0.0;
    for (double eps : c.eps_list) {
        const ModelSpec spec = langevin_model(c.alpha, c.sigma, eps, c.x0);
        const CellConstants cell = compute_cell_constants(spec, c.quad_tol);
        rep.rows.push_back({eps, cell.K, cell.Z_plus, cell.Z_minus, cell.Z, cell.Z_eps});
        const double series = bessel_series(1.0 / c.sigma, 1e-15);
        const double k_series = 1.0 / (series * series);
        dual_route_gap = std::max(dual_route_gap, std::abs(cell.K - k_series));
    }
    add_decision(rep, "cell_constant_dual_route_gap", dual_route_gap, 1e-8, "<=");

    // Table export for plotting, on the finest-eps instance.
    const double eps = c.eps_list.back();
    const ModelSpec spec = langevin_model(c.alpha, c.sigma, eps, c.x0);
    const CellConstants cell = compute_cell_constants(spec, c.quad_tol);
    const HomogenizedSpec limit = homogenize_langevin(spec, cell.K);
    const double h = std::min(2.0 * std::numbers::pi * eps / 320.0, 5e-3);
    const QuadratureGrid grid = make_symmetric_grid(c.L, h);
    const DensityTable density = invariant_density(spec, limit, grid);
    const ScaleTable scale = scale_tables(spec, limit, grid);
    std::ostringstream os;
    write_tables_csv(os, density, scale);
    rep.attachments.emplace_back("tables.csv", os.str());
    return rep;
}

ExperimentReport run_met(const RunContext& c) {
    ExperimentReport rep;
    rep.experiment = "met";
    if (c.t_fixed <= 0.0 && !c.schedule.valid())
        throw ConfigError("met: schedule invalid and no fixed horizon given");
    checked_cell_factor(c);

    const double ind_lo = c.cfg.get_double("indicator_lo", -1.0);
    const double ind_hi = c.cfg.get_double("indicator_hi", 1.0);
    std::vector<std::string> names;
    std::vector<std::function<double(double)>> phis;
    {
        std::istringstream is(c.cfg.get_string("met_phi", "cos,indicator"));
        std::string tok;
        while (std::getline(is, tok, ',')) {
            tok = trim(tok);
            if (tok == "cos") {
                phis.emplace_back([](double x) { return std::cos(x); });
            } else if (tok == "indicator") {
                phis.emplace_back(
                    [ind_lo, ind_hi](double x) { return (x >= ind_lo && x <= ind_hi) ? 1.0 : 0.0; });
            } else if (tok == "one") {
                phis.emplace_back([](double) { return 1.0; });
            } else {
                throw ConfigError("met: unknown test function '" + tok + "'");
            }
            names.push_back(tok);
        }
    }
    if (phis.empty()) throw ConfigError("met: no test functions");

    rep.columns = {"eps", "T", "dt", "n_replicates"};
    for (const auto& n : names) {
        rep.columns.push_back("ref_" + n);
        rep.columns.push_back("mse_" + n);
    }

    std::vector<double> mse_first;
    for (double eps : c.eps_list) {
        const ModelSpec spec = langevin_model(c.alpha, c.sigma, eps, c.x0);
        const double T = c.horizon(eps);
        const double dt = c.step_size(eps);

        std::vector<double> refs(phis.size());
        for (std::size_t j = 0; j < phis.size(); ++j) {
            if (names[j] == "indicator") {
                // ratio of kernel masses over [lo, hi] and the working domain
                const double num = integrate_refined(
                    [&](double x) { return mu_eps_kernel(spec, x); }, ind_lo, ind_hi, 1e-12,
                    static_cast<std::size_t>(std::max(64.0, 40.0 * (ind_hi - ind_lo) /
                                                                  (2.0 * std::numbers::pi * eps))));
                const double Lw = std::max(c.L, envelope_half_width(c.alpha, c.sigma));
                const double den = integrate_refined(
                    [&](double x) { return mu_eps_kernel(spec, x); }, -Lw, Lw, 1e-12,
                    static_cast<std::size_t>(std::max(64.0, 40.0 * 2.0 * Lw /
                                                                  (2.0 * std::numbers::pi * eps))));
                refs[j] = num / den;
            } else {
                refs[j] = mean_under_mu_eps(spec, phis[j], c.L, 1e-12);
            }
        }

        std::vector<std::vector<double>> sq_err(phis.size(),
                                                std::vector<double>(c.n_replicates, 0.0));
        std::vector<std::uint64_t> steps(c.n_replicates, 0);
        std::vector<ReplicateRow> rows(static_cast<std::size_t>(c.n_replicates));
        parallel_replicates(c.n_replicates, c.workers, [&](int r) {
            PathSimConfig pc;
            pc.dt = dt;
            pc.T = T;
            pc.seed = c.base_seed;
            pc.replicate_id = static_cast<std::uint64_t>(r);
            pc.blow_up_limit = 10.0 * c.L;
            const ErgodicAccumulator acc = simulate_accumulate(spec, pc, phis);
            for (std::size_t j = 0; j < phis.size(); ++j) {
                const double e = acc.average(j) - refs[j];
                sq_err[j][static_cast<std::size_t>(r)] = e * e;
            }
            steps[static_cast<std::size_t>(r)] = acc.steps;
            ReplicateRow row;
            row.eps = eps;
            row.T = T;
            row.seed = c.base_seed;
            row.replicate_id = static_cast<std::uint64_t>(r);
            row.re_c = acc.c_hat().real();
            row.im_c = acc.c_hat().imag();
            row.std_error = acc.average(0) - refs[0];
            rows[static_cast<std::size_t>(r)] = row;
        });
        for (auto s : steps) rep.total_steps += s;
        rep.replicates.insert(rep.replicates.end(), rows.begin(), rows.end());

        std::vector<double> row = {eps, T, dt, static_cast<double>(c.n_replicates)};
        for (std::size_t j = 0; j < phis.size(); ++j) {
            row.push_back(refs[j]);
            row.push_back(mean(sq_err[j]));
        }
        rep.rows.push_back(row);
        mse_first.push_back(mean(sq_err[0]));
        rep.curve.emplace_back(eps, mse_first.back());
    }
    rep.curve_name = "l2_error_vs_eps";

    double worst_increase = -1e300;
    for (std::size_t i = 1; i < mse_first.size(); ++i)
        worst_increase = std::max(worst_increase, mse_first[i] - mse_first[i - 1]);
    if (mse_first.size() > 1)
        add_decision(rep, "met_mse_" + names[0] + "_strictly_decreasing", worst_increase, 0.0, "<");
    add_decision(rep, "met_mse_" + names[0] + "_final", mse_first.back(),
                 c.cfg.get_double("met_final_mse_max", 0.01), "<=");
    return rep;
}

ExperimentReport run_clt(const RunContext& c) {
    ExperimentReport rep;
    rep.experiment = "clt";
    const double K = checked_cell_factor(c);
    const double eps = c.eps_list.front();
    const double T = c.horizon(eps);
    const double dt = c.step_size(eps);
    const ModelSpec spec = langevin_model(c.alpha, c.sigma, eps, c.x0);

    const double tau_eps = tau_eps_cos_channel(c, eps, K);
    const double m_eps = mean_under_mu_eps(
        spec, [](double x) { return std::cos(x); }, c.L, 1e-12);

    std::vector<double> standardized(c.n_replicates, 0.0);
    std::vector<ReplicateRow> rows(c.n_replicates);
    std::vector<std::uint64_t> steps(c.n_replicates, 0);
    parallel_replicates(c.n_replicates, c.workers, [&](int r) {
        PathSimConfig pc;
        pc.dt = dt;
        pc.T = T;
        pc.seed = c.base_seed;
        pc.replicate_id = static_cast<std::uint64_t>(r);
        pc.blow_up_limit = 10.0 * c.L;
        const ErgodicAccumulator acc = simulate_accumulate(spec, pc, {});
        const double stat =
            (acc.sum_cos - m_eps * acc.elapsed) / (std::sqrt(acc.elapsed) * tau_eps);
        standardized[static_cast<std::size_t>(r)] = stat;
        ReplicateRow row;
        row.eps = eps;
        row.T = T;
        row.seed = c.base_seed;
        row.replicate_id = static_cast<std::uint64_t>(r);
        row.re_c = acc.c_hat().real();
        row.im_c = acc.c_hat().imag();
        row.std_error = stat;
        rows[static_cast<std::size_t>(r)] = row;
        steps[static_cast<std::size_t>(r)] = acc.steps;
    });
    for (auto s : steps) rep.total_steps += s;

    const double ks = ks_statistic(standardized);
    rep.columns = {"eps", "T", "n_replicates", "tau_eps", "ref_cos", "ks", "ks_critical_5pct"};
    rep.rows.push_back({eps, T, static_cast<double>(c.n_replicates), tau_eps, m_eps, ks,
                        ks_critical_5pct(standardized.size())});
    rep.histogram_samples = standardized;
    rep.replicates = std::move(rows);
    add_decision(rep, "clt_ks", ks, c.cfg.get_double("clt_ks_max", 0.12), "<=");
    return rep;
}

ExperimentReport run_tail(const RunContext& c) {
    ExperimentReport rep;
    rep.experiment = "tail";
    checked_cell_factor(c);
    const double delta = c.cfg.get_double("tail_delta", 0.5);
    const auto points = endpoint_tail_statistic(c.alpha, c.sigma, c.x0, c.schedule, delta,
                                                c.n_replicates, c.base_seed, c.workers);
    rep.columns = {"eps", "T", "fraction"};
    double worst_increase = -1e300;
    for (std::size_t i = 0; i < points.size(); ++i) {
        rep.rows.push_back({points[i].eps, points[i].T, points[i].fraction});
        rep.curve.emplace_back(points[i].eps, points[i].fraction);
        const double dt = c.step_size(points[i].eps);
        rep.total_steps += static_cast<std::uint64_t>(c.n_replicates) *
                           static_cast<std::uint64_t>(std::ceil(points[i].T / dt - 1e-9));
        if (i > 0) worst_increase = std::max(worst_increase, points[i].fraction - points[i - 1].fraction);
    }
    rep.curve_name = "exceedance_vs_eps";
    if (points.size() > 1) add_decision(rep, "tail_fraction_nonincreasing", worst_increase, 0.0, "<=");
    add_decision(rep, "tail_fraction_final", points.back().fraction,
                 c.cfg.get_double("tail_final_max", 0.05), "<=");
    return rep;
}

EstimatorConfig estimator_config(const RunContext& c, double K) {
    EstimatorConfig ec;
    ec.sigma_eff = c.sigma * K;
    ec.theta_min = c.cfg.get_double("theta_min", 0.01);
    ec.theta_max = c.cfg.get_double("theta_max", 10.0);
    ec.projection_floor = c.cfg.get_double("projection_floor", 1e-6);
    return ec;
}

ExperimentReport run_estimate(const RunContext& c) {
    ExperimentReport rep;
    rep.experiment = "estimate";
    const double K = checked_cell_factor(c);
    const EstimatorConfig ec = estimator_config(c, K);
    const double theta0 = c.alpha * K;
    const std::string mode = c.cfg.get_string("estimate_mode", "consistency");

    if (mode == "consistency") {
        const auto res = consistency_experiment(c.alpha, c.sigma, c.x0, c.schedule, ec,
                                                c.n_replicates, c.base_seed, c.workers);
        rep.columns = {"eps", "T", "median_rel_error", "boundary_count"};
        for (const auto& pt : res.points) {
            rep.rows.push_back({pt.eps, pt.T, pt.median_rel_error,
                                static_cast<double>(pt.boundary_count)});
            rep.curve.emplace_back(pt.eps, pt.median_rel_error);
            for (const auto& r : pt.records) {
                ReplicateRow row;
                row.eps = r.eps;
                row.T = r.T;
                row.seed = r.seed;
                row.replicate_id = r.replicate_id;
                row.re_c = r.c_hat.real();
                row.im_c = r.c_hat.imag();
                row.theta_hat = r.theta_hat;
                row.std_error = r.standardized_error;
                row.boundary_flag = r.boundary ? 1 : 0;
                rep.replicates.push_back(row);
            }
            const double dt = c.step_size(pt.eps);
            rep.total_steps += static_cast<std::uint64_t>(pt.records.size()) *
                               static_cast<std::uint64_t>(std::ceil(pt.T / dt - 1e-9));
        }
        rep.curve_name = "median_rel_error_vs_eps";
        add_decision(rep, "estimate_schedule_valid", res.schedule_valid ? 1.0 : 0.0, 1.0, ">=");
        if (res.schedule_valid) {
            double worst_increase = -1e300;
            for (std::size_t i = 1; i < res.points.size(); ++i)
                worst_increase = std::max(worst_increase, res.points[i].median_rel_error -
                                                              res.points[i - 1].median_rel_error);
            if (res.points.size() > 1)
                add_decision(rep, "estimate_median_nonincreasing", worst_increase, 0.0, "<=");
            add_decision(rep, "estimate_median_rel_error_final",
                         res.points.back().median_rel_error,
                         c.cfg.get_double("est_median_rel_max", 0.15), "<=");
        }
        return rep;
    }

    if (mode != "normality") throw ConfigError("estimate: unknown estimate_mode '" + mode + "'");
    const double eps = c.eps_list.front();
    const double T = c.horizon(eps);
    const double tau = tau_eps_cos_channel(c, eps, K);
    const auto res = normality_experiment(c.alpha, c.sigma, c.x0, eps, T, c.n_replicates, tau,
                                          theta0, ec, c.base_seed, c.workers);
    rep.columns = {"eps", "T", "n_replicates", "theta0", "tau", "delta_scale",
                   "ks", "ks_critical_5pct", "degenerate"};
    rep.rows.push_back({eps, T, static_cast<double>(c.n_replicates), theta0, tau, res.scale,
                        res.ks, res.ks_critical, res.degenerate ? 1.0 : 0.0});
    rep.histogram_samples = res.standardized;
    for (const auto& r : res.records) {
        ReplicateRow row;
        row.eps = r.eps;
        row.T = r.T;
        row.seed = r.seed;
        row.replicate_id = r.replicate_id;
        row.re_c = r.c_hat.real();
        row.im_c = r.c_hat.imag();
        row.theta_hat = r.theta_hat;
        row.std_error = r.standardized_error;
        row.boundary_flag = r.boundary ? 1 : 0;
        rep.replicates.push_back(row);
    }
    const double dt = c.step_size(eps);
    rep.total_steps += static_cast<std::uint64_t>(c.n_replicates) *
                       static_cast<std::uint64_t>(std::ceil(T / dt - 1e-9));

    // Central finite difference of g(v) = -sigma_eff/(2 log v) at v0 audits the
    // closed-form delta-method derivative.
    const double v0 = std::exp(-0.5 * ec.sigma_eff / theta0);
    auto g = [&](double v) { return -ec.sigma_eff / (2.0 * std::log(v)); };
    const double fd = (g(v0 + 1e-6) - g(v0 - 1e-6)) / 2e-6;
    const double closed = 2.0 * theta0 * theta0 * std::exp(0.5 * ec.sigma_eff / theta0) / ec.sigma_eff;
    add_decision(rep, "delta_method_fd_rel_gap", std::abs(fd - closed) / std::abs(closed), 1e-5,
                 "<=");
    add_decision(rep, "normality_ks", res.ks, c.cfg.get_double("normality_ks_max", 0.12), "<=");
    return rep;
}

ExperimentReport run_poisson(const RunContext& c) {
    ExperimentReport rep;
    rep.experiment = "poisson";
    const double K = checked_cell_factor(c);
    rep.columns = {"eps", "tau_sq_cos", "tau_sq_total", "dirichlet_gap_cos", "max_phi_prime_cos"};
    double worst_gap = 0.0;

    for (double eps : c.eps_list) {
        const ModelSpec spec = langevin_model(c.alpha, c.sigma, eps, c.x0);
        const HomogenizedSpec limit = homogenize_langevin(spec, K);
        const DensityTable density = invariant_density(spec, limit, poisson_grid(c.L, eps));
        const auto sol = solve_poisson_characteristic(density, generator_view(spec));
        rep.rows.push_back({eps, sol.re.tau_sq, sol.tau_sq, sol.re.dirichlet_gap,
                            sol.re.phi_prime_sup});
        worst_gap = std::max(worst_gap, sol.re.dirichlet_gap / (1.0 + sol.re.tau_sq));
        std::ostringstream os;
        write_solution_csv(os, sol.re);
        rep.attachments.emplace_back("poisson_cos_eps_" + fmt(eps) + ".csv", os.str());
    }

    // Limit solve, reported with eps = 0.
    const ModelSpec spec = langevin_model(c.alpha, c.sigma, c.eps_list.front(), c.x0);
    const HomogenizedSpec limit = homogenize_langevin(spec, K);
    const DensityTable density = invariant_density(spec, limit, limit_poisson_grid(c.L));
    const auto sol = solve_poisson_characteristic(density, generator_view(limit));
    rep.rows.push_back(
        {0.0, sol.re.tau_sq, sol.tau_sq, sol.re.dirichlet_gap, sol.re.phi_prime_sup});
    worst_gap = std::max(worst_gap, sol.re.dirichlet_gap / (1.0 + sol.re.tau_sq));
    std::ostringstream os;
    write_solution_csv(os, sol.re);
    rep.attachments.emplace_back("poisson_cos_limit.csv", os.str());

    add_decision(rep, "poisson_dirichlet_gap_rel", worst_gap, 1e-5, "<=");
    return rep;
}

ExperimentReport run_hitting(const RunContext& c) {
    ExperimentReport rep;
    rep.experiment = "hitting";
    const double K = checked_cell_factor(c);
    const ModelSpec spec = langevin_model(c.alpha, c.sigma, c.eps_list.front(), c.x0);
    const HomogenizedSpec limit = homogenize_langevin(spec, K);

    const double from = c.cfg.get_double("hit_from", 1.0);
    const double to = c.cfg.get_double("hit_to", 0.0);
    const double dt = c.cfg.get_double("hit_dt", 1e-4);
    const double t_max = c.cfg.get_double("hit_tmax", 200.0);
    const double sigmas = c.cfg.get_double("hitting_sigmas", 3.0);

    const QuadratureGrid grid = make_symmetric_grid(c.L, 1e-3);
    const ScaleTable table = scale_tables(spec, limit, grid);
    auto f_at = [&](double x) {
        const auto& xs = grid.nodes;
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        std::size_t i = static_cast<std::size_t>(it - xs.begin());
        if (i == 0) i = 1;
        if (i >= xs.size()) i = xs.size() - 1;
        const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
        return table.f[i - 1] * (1.0 - t) + table.f[i] * t;
    };
    const double expected = expected_hitting_time(f_at(from), f_at(to), limit_view(table));

    const double theta = limit.theta;
    const double coeff = std::sqrt(2.0 * limit.sigma_eff);
    const ModelSpec ou = general_model([theta](double x) { return -theta * x; },
                                       [](double) { return 0.0; }, 1.0,
                                       [coeff](double) { return coeff; }, 1.0, from);

    auto mc_mean = [&](double step, std::uint64_t seed_offset, double& se, int& censored,
                       std::uint64_t& steps_used) {
        std::vector<double> hits(c.n_replicates, 0.0);
        std::vector<int> cens(c.n_replicates, 0);
        std::vector<std::uint64_t> st(c.n_replicates, 0);
        parallel_replicates(c.n_replicates, c.workers, [&](int r) {
            PathSimConfig pc;
            pc.dt = step;
            pc.T = t_max;
            pc.seed = c.base_seed + seed_offset;
            pc.replicate_id = static_cast<std::uint64_t>(r);
            pc.blow_up_limit = 10.0 * c.L;
            const FirstPassageRecord rec = first_passage(ou, pc, to);
            hits[static_cast<std::size_t>(r)] = rec.hit_time;
            cens[static_cast<std::size_t>(r)] = rec.censored ? 1 : 0;
            st[static_cast<std::size_t>(r)] = rec.steps;
        });
        std::vector<double> uncensored;
        censored = 0;
        for (int r = 0; r < c.n_replicates; ++r) {
            if (cens[static_cast<std::size_t>(r)])
                ++censored;
            else
                uncensored.push_back(hits[static_cast<std::size_t>(r)]);
        }
        for (auto s : st) steps_used += s;
        if (uncensored.size() < 2) throw std::runtime_error("hitting: too many censored replicates");
        se = std::sqrt(sample_variance(uncensored) / static_cast<double>(uncensored.size()));
        return mean(uncensored);
    };

    double se = 0.0;
    int censored = 0;
    std::uint64_t steps_used = 0;
    const double mc = mc_mean(dt, 0, se, censored, steps_used);
    rep.total_steps += steps_used;
    const double z = std::abs(mc - expected) / se;

    rep.columns = {"expected", "mc_mean", "mc_se", "z_score", "n_censored", "dt"};
    rep.rows.push_back({expected, mc, se, z, static_cast<double>(censored), dt});
    add_decision(rep, "hitting_z_score", z, sigmas, "<=");

    if (c.cfg.get_bool("hit_dt_check", true)) {
        double se2 = 0.0;
        int censored2 = 0;
        std::uint64_t steps2 = 0;
        const double mc2 = mc_mean(dt / 2.0, 0, se2, censored2, steps2);
        rep.total_steps += steps2;
        const double z2 = std::abs(mc2 - expected) / se2;
        rep.rows.push_back({expected, mc2, se2, z2, static_cast<double>(censored2), dt / 2.0});
        add_decision(rep, "hitting_z_score_dt_halved", z2, sigmas, "<=");
    }
    return rep;
}

} // namespace

ExperimentConfig ExperimentConfig::parse_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
        if (!known_keys().count(key))
            throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        cfg.kv[key] = value;
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return parse_text(os.str());
}

std::string ExperimentConfig::canonical() const {
    std::ostringstream os;
    for (const auto& [k, v] : kv) os << k << " = " << v << "\n";
    return os.str();
}

std::string ExperimentConfig::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

double ExperimentConfig::get_double(const std::string& key, double fallback) const {
    const auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(it->second, &pos);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': not a number: " + it->second);
    }
    if (pos != it->second.size()) throw ConfigError("key '" + key + "': trailing characters");
    return v;
}

int ExperimentConfig::get_int(const std::string& key, int fallback) const {
    const double v = get_double(key, static_cast<double>(fallback));
    if (v != std::floor(v)) throw ConfigError("key '" + key + "': expected an integer");
    return static_cast<int>(v);
}

bool ExperimentConfig::get_bool(const std::string& key, bool fallback) const {
    const auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ConfigError("key '" + key + "': expected true/false");
}

std::vector<double> ExperimentConfig::get_list(const std::string& key,
                                               const std::vector<double>& fallback) const {
    const auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    std::vector<double> out;
    std::istringstream is(it->second);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': bad list entry '" + tok + "'");
        }
    }
    return out;
}

void ExperimentConfig::set(const std::string& key, double value) { kv[key] = fmt(value); }
void ExperimentConfig::set(const std::string& key, int value) { kv[key] = std::to_string(value); }

bool ExperimentReport::passed() const {
    for (const auto& d : decisions)
        if (!d.pass) return false;
    return true;
}

std::string ExperimentReport::to_json() const {
    nlohmann::json j;
    j["experiment"] = experiment;
    j["config"] = config_echo;
    j["config_text"] = config_text;
    j["columns"] = columns;
    j["rows"] = rows;
    nlohmann::json ds = nlohmann::json::array();
    for (const auto& d : decisions) {
        ds.push_back({{"name", d.name},
                      {"value", d.value},
                      {"threshold", d.threshold},
                      {"comparator", d.comparator},
                      {"pass", d.pass}});
    }
    j["decisions"] = ds;
    j["n_replicate_rows"] = replicates.size();
    j["total_steps"] = total_steps;
    j["wall_seconds"] = wall_seconds;
    j["passed"] = passed();
    return j.dump(2);
}

std::string ExperimentReport::summary_csv() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < columns.size(); ++i)
        os << columns[i] << (i + 1 < columns.size() ? "," : "");
    os << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            os << fmt(row[i]) << (i + 1 < row.size() ? "," : "");
        os << "\n";
    }
    return os.str();
}

ExperimentReport run(const ExperimentConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::string name = config.get_string("experiment", "");
    bool known = false;
    for (const auto* k : kKnownExperiments)
        if (name == k) known = true;
    if (!known) throw ConfigError("unknown experiment '" + name + "'");

    const RunContext ctx = make_context(config);
    ExperimentReport rep;
    if (name == "coeff")
        rep = run_coeff(ctx);
    else if (name == "met")
        rep = run_met(ctx);
    else if (name == "clt")
        rep = run_clt(ctx);
    else if (name == "estimate")
        rep = run_estimate(ctx);
    else if (name == "tail")
        rep = run_tail(ctx);
    else if (name == "poisson")
        rep = run_poisson(ctx);
    else
        rep = run_hitting(ctx);

    rep.config_echo = config.kv;
    rep.config_text = config.canonical();
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

std::vector<std::string> emit(const ExperimentReport& report, const std::string& formats,
                              const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const bool want_json = formats.find("json") != std::string::npos;
    const bool want_csv = formats.find("csv") != std::string::npos;
    const bool want_dat = formats.find("dat") != std::string::npos;
    std::vector<std::string> written;

    auto write_file = [&](const std::string& name, const std::string& content) {
        const std::string path = (fs::path(out_dir) / name).string();
        std::ofstream os(path, std::ios::binary);
        if (!os) throw std::runtime_error("emit: cannot write " + path);
        os << content;
        written.push_back(path);
    };

    if (want_json) write_file("report.json", report.to_json());
    if (want_csv) {
        write_file("summary.csv", report.summary_csv());
        if (!report.replicates.empty()) {
            std::ostringstream os;
            os << "eps,T,seed,replicate_id,re_c,im_c,theta_hat,std_error,boundary_flag\n";
            for (const auto& r : report.replicates) {
                os << fmt(r.eps) << "," << fmt(r.T) << "," << r.seed << "," << r.replicate_id
                   << "," << fmt(r.re_c) << "," << fmt(r.im_c) << "," << fmt(r.theta_hat) << ","
                   << fmt(r.std_error) << "," << r.boundary_flag << "\n";
            }
            write_file("replicates.csv", os.str());
        }
        for (const auto& [name, content] : report.attachments) write_file(name, content);
    }
    if (want_dat) {
        if (!report.curve.empty() && !report.curve_name.empty()) {
            std::ostringstream os;
            for (const auto& [x, y] : report.curve) os << fmt(x) << " " << fmt(y) << "\n";
            write_file(report.curve_name + ".dat", os.str());
        }
        if (!report.histogram_samples.empty()) {
            // 30 bins spanning [-4, 4]; out-of-range samples clamp to end bins.
            constexpr int kBins = 30;
            const double lo = -4.0, hi = 4.0;
            std::vector<int> counts(kBins, 0);
            for (double s : report.histogram_samples) {
                int b = static_cast<int>(std::floor((s - lo) / (hi - lo) * kBins));
                b = std::clamp(b, 0, kBins - 1);
                ++counts[static_cast<std::size_t>(b)];
            }
            std::ostringstream os;
            for (int b = 0; b < kBins; ++b) {
                const double center = lo + (static_cast<double>(b) + 0.5) * (hi - lo) / kBins;
                os << fmt(center) << " " << counts[static_cast<std::size_t>(b)] << "\n";
            }
            write_file("histogram.dat", os.str());
        }
    }
    return written;
}

} // namespace mshom
