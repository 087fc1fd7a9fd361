#include "mshom/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace mshom {

namespace {

constexpr double kPi = std::numbers::pi;

double period_resolving_panels(double length, double eps, double min_nodes_per_period = 32.0) {
    const double period = 2.0 * kPi * eps;
    return std::max(64.0, std::ceil(min_nodes_per_period * length / period / 2.0));
}

// Normalization of a kernel given by an accumulated exponent, for models
// without a closed-form density. The grid is doubled until the mass settles.
double normalization_by_doubling(const std::function<double(double)>& q,
                                 const std::function<double(double)>& inv_sigma_sq,
                                 double half_width, double tol, std::size_t start_nodes) {
    double prev = 0.0;
    std::size_t n = start_nodes | 1u;
    for (int iter = 0; iter < 12; ++iter) {
        const QuadratureGrid g = make_simpson_grid(-half_width, half_width, n);
        std::vector<double> qv(g.n_nodes);
        for (std::size_t i = 0; i < g.n_nodes; ++i) qv[i] = q(g.nodes[i]);
        const auto expo = cumulative_trapezoid(g.nodes, qv, g.index_of_zero());
        std::vector<double> k(g.n_nodes);
        for (std::size_t i = 0; i < g.n_nodes; ++i)
            k[i] = inv_sigma_sq(g.nodes[i]) * std::exp(expo[i]);
        const double mass = integrate(g, k);
        if (iter > 0 && std::abs(mass - prev) <= tol * (1.0 + std::abs(mass))) return mass;
        prev = mass;
        n = 2 * n - 1;
    }
    throw std::runtime_error("kernel normalization did not converge under grid doubling");
}

double fit_tail_rate(const std::vector<double>& u, const std::vector<double>& r, bool upper) {
    const std::size_t n = u.size();
    std::size_t i1 = upper ? n - 1 : 0;
    std::size_t i0 = upper ? n - 2 : 1;
    const double du = std::abs(u[i1] - u[i0]);
    if (du <= 0.0 || r[i0] <= 0.0 || r[i1] <= 0.0) return 0.0;
    return (std::log(r[i0]) - std::log(r[i1])) / du; // positive when decaying outward
}

// integral of (c0 + c1*z) * rho_sq(z) over [lo, hi] with rho_sq piecewise
// linear between view nodes; exact per segment (quadratic integrand).
double weighted_speed_integral(const SpeedView& v, double lo, double hi, double c0, double c1) {
    if (!(lo <= hi)) std::swap(lo, hi);
    const auto& u = v.u;
    const std::size_t n = u.size();
    if (lo < u.front() - 1e-12 || hi > u.back() + 1e-12)
        throw std::invalid_argument("speed integral outside the tabulated transformed domain");
    lo = std::max(lo, u.front());
    hi = std::min(hi, u.back());
    if (hi <= lo) return 0.0;

    auto value_at = [&](std::size_t seg, double z) {
        const double t = (z - u[seg]) / (u[seg + 1] - u[seg]);
        return v.rho_sq[seg] * (1.0 - t) + v.rho_sq[seg + 1] * t;
    };

    // first segment containing lo
    std::size_t seg = static_cast<std::size_t>(
        std::upper_bound(u.begin(), u.end(), lo) - u.begin());
    seg = (seg == 0) ? 0 : seg - 1;
    if (seg >= n - 1) seg = n - 2;

    double acc = 0.0;
    double z0 = lo;
    while (z0 < hi) {
        const double z1 = std::min(hi, u[seg + 1]);
        if (z1 > z0) {
            const double zm = 0.5 * (z0 + z1);
            const double f0 = (c0 + c1 * z0) * value_at(seg, z0);
            const double fm = (c0 + c1 * zm) * value_at(seg, zm);
            const double f1 = (c0 + c1 * z1) * value_at(seg, z1);
            acc += (z1 - z0) / 6.0 * (f0 + 4.0 * fm + f1);
        }
        if (z1 >= hi) break;
        ++seg;
        if (seg >= n - 1) break;
        z0 = z1;
    }
    return acc;
}

// Fourth-order cumulative integral on a uniform grid (cubic panel rule with
// one-sided ends), so the residual measures harmonicity rather than the
// accumulation error of the diagnostic itself.
std::vector<double> cumulative_quartic(const std::vector<double>& q, double h, std::size_t anchor) {
    const std::size_t n = q.size();
    std::vector<double> inc(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (i == 0)
            inc[i] = h / 24.0 * (9.0 * q[0] + 19.0 * q[1] - 5.0 * q[2] + q[3]);
        else if (i + 2 >= n)
            inc[i] = h / 24.0 * (q[n - 4] - 5.0 * q[n - 3] + 19.0 * q[n - 2] + 9.0 * q[n - 1]);
        else
            inc[i] = h / 24.0 * (-q[i - 1] + 13.0 * q[i] + 13.0 * q[i + 1] - q[i + 2]);
    }
    std::vector<double> out(n);
    out[anchor] = 0.0;
    for (std::size_t i = anchor + 1; i < n; ++i) out[i] = out[i - 1] + inc[i - 1];
    for (std::size_t i = anchor; i-- > 0;) out[i] = out[i + 1] - inc[i];
    return out;
}

double harmonicity_core(const std::function<double(double)>& drift,
                        const std::function<double(double)>& diffusion,
                        const QuadratureGrid& grid) {
    if (!grid.uniform()) throw std::invalid_argument("harmonicity_residual: uniform grid required");
    const std::size_t n = grid.n_nodes;
    if (n < 7) throw std::invalid_argument("harmonicity_residual: grid too small");
    const double h = grid.spacing();

    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = diffusion(grid.nodes[i]);
        q[i] = -2.0 * drift(grid.nodes[i]) / (s * s);
    }
    const auto G = cumulative_quartic(q, h, grid.index_of_zero());
    std::vector<double> fp(n);
    for (std::size_t i = 0; i < n; ++i) fp[i] = std::exp(G[i]);

    double worst = 0.0;
    for (std::size_t i = 2; i + 2 < n; ++i) {
        const double fpp =
            (-fp[i + 2] + 8.0 * fp[i + 1] - 8.0 * fp[i - 1] + fp[i - 2]) / (12.0 * h);
        const double b = drift(grid.nodes[i]);
        const double s = diffusion(grid.nodes[i]);
        const double bf = b * fp[i];
        const double res = std::abs(bf + 0.5 * s * s * fpp) / (1.0 + std::abs(bf));
        worst = std::max(worst, res);
    }
    return worst;
}

} // namespace

SpeedView eps_view(const ScaleTable& t) {
    SpeedView v;
    v.u = t.f_eps;
    v.rho_sq.resize(t.rho_eps_sq.size());
    for (std::size_t i = 0; i < v.rho_sq.size(); ++i)
        v.rho_sq[i] = t.rho_eps_sq[i] / t.fprime_eps[i];
    v.tail_rate_upper = fit_tail_rate(v.u, v.rho_sq, true);
    v.tail_rate_lower = fit_tail_rate(v.u, v.rho_sq, false);
    return v;
}

SpeedView limit_view(const ScaleTable& t) {
    SpeedView v;
    v.u = t.f;
    v.rho_sq.resize(t.rho_sq.size());
    for (std::size_t i = 0; i < v.rho_sq.size(); ++i) v.rho_sq[i] = t.rho_sq[i] / t.fprime[i];
    v.tail_rate_upper = fit_tail_rate(v.u, v.rho_sq, true);
    v.tail_rate_lower = fit_tail_rate(v.u, v.rho_sq, false);
    return v;
}

double envelope_half_width(double alpha, double sigma) {
    return std::sqrt(2.0 * sigma / alpha * std::log(1e14));
}

double bessel_series(double inv_sigma, double tol) {
    if (inv_sigma < 0.0) throw std::invalid_argument("bessel_series: inv_sigma must be >= 0");
    const double q = 0.25 * inv_sigma * inv_sigma;
    double term = 1.0;
    double sum = 1.0;
    for (int m = 1; m < 500; ++m) {
        term *= q / (static_cast<double>(m) * static_cast<double>(m));
        sum += term;
        if (term < tol) break;
    }
    return sum;
}

double mu_eps_kernel(const ModelSpec& spec, double x) {
    if (spec.kind != ModelKind::LangevinExample)
        throw std::invalid_argument("mu_eps_kernel: closed form available for the Langevin instance only");
    const double a = spec.alpha, s = spec.sigma_param, e = spec.eps;
    return std::exp(-0.5 * a * x * x / s + std::cos(x / e) / s);
}

double mu_kernel(const HomogenizedSpec& limit, double x) {
    // exp(-theta x^2 / (2 sigma_eff)); for the Langevin limit this equals
    // exp(-alpha x^2 / (2 sigma)) because K cancels.
    return std::exp(-0.5 * limit.theta * x * x / limit.sigma_eff);
}

CellConstants compute_cell_constants(const ModelSpec& spec, double tol) {
    CellConstants c;

    if (spec.kind == ModelKind::LangevinExample) {
        const double s = spec.sigma_param;
        const double L = envelope_half_width(spec.alpha, s);
        c.Z_plus = integrate_refined([s](double y) { return std::exp(std::cos(y) / s); },
                                     0.0, 2.0 * kPi, tol) / (2.0 * kPi);
        c.Z_minus = integrate_refined([s](double y) { return std::exp(-std::cos(y) / s); },
                                      0.0, 2.0 * kPi, tol) / (2.0 * kPi);
        c.K = 1.0 / (c.Z_plus * c.Z_minus);
        c.Z = integrate_refined([&](double x) { return std::exp(-0.5 * spec.alpha * x * x / s); },
                                -L, L, tol);
        const auto panels = static_cast<std::size_t>(period_resolving_panels(2.0 * L, spec.eps));
        c.Z_eps = integrate_refined([&](double x) { return mu_eps_kernel(spec, x); },
                                    -L, L, tol, panels);
        return c;
    }

    if (!spec.f1) throw std::invalid_argument("compute_cell_constants: model lacks a fast drift");
    // Constant-sigma general model: de-meaned fast potential over one period,
    // Z+- as period averages of exp(-+ 2 p / sigma^2).
    const double P = spec.f1_period;
    const double s0 = spec.diffusion(0.0);
    for (int k = 0; k < 16; ++k) {
        const double x = -1.0 + 2.0 * static_cast<double>(k) / 15.0;
        if (std::abs(spec.diffusion(x) - s0) > 1e-12 * (1.0 + s0))
            throw std::invalid_argument("compute_cell_constants: general path requires constant sigma");
    }
    double prev_K = 0.0;
    std::size_t n = 2049;
    for (int iter = 0; iter < 10; ++iter) {
        const QuadratureGrid g = make_simpson_grid(0.0, P, n);
        std::vector<double> f1v(g.n_nodes);
        for (std::size_t i = 0; i < g.n_nodes; ++i) f1v[i] = -spec.f1(g.nodes[i]);
        auto pot = cumulative_trapezoid(g.nodes, f1v, 0);
        const double mean_pot = integrate(g, pot) / P;
        std::vector<double> ep(g.n_nodes), em(g.n_nodes);
        for (std::size_t i = 0; i < g.n_nodes; ++i) {
            const double qv = 2.0 * (pot[i] - mean_pot) / (s0 * s0);
            ep[i] = std::exp(-qv);
            em[i] = std::exp(qv);
        }
        c.Z_plus = integrate(g, ep) / P;
        c.Z_minus = integrate(g, em) / P;
        c.K = 1.0 / (c.Z_plus * c.Z_minus);
        if (iter > 0 && std::abs(c.K - prev_K) <= tol * (1.0 + std::abs(c.K))) break;
        prev_K = c.K;
        n = 2 * n - 1;
        if (iter == 9) throw std::runtime_error("compute_cell_constants: cell quadrature did not converge");
    }
    auto inv_s2 = [&spec](double x) { const double s = spec.diffusion(x); return 1.0 / (s * s); };
    c.Z_eps = normalization_by_doubling(
        [&spec](double x) {
            const double s = spec.diffusion(x);
            return 2.0 * spec.drift(x) / (s * s);
        },
        inv_s2, working_half_width(spec), tol, 4097);
    // Z belongs to the homogenized kernel, which the library derives only for
    // the Langevin instance; general callers supply their own limit.
    c.Z = 0.0;
    return c;
}

DensityTable invariant_density(const ModelSpec& spec, const HomogenizedSpec& limit,
                               const QuadratureGrid& grid) {
    DensityTable t;
    t.grid = grid;
    t.eps = spec.eps;
    const std::size_t n = grid.n_nodes;
    std::vector<double> keps(n), kmu(n);

    if (spec.kind == ModelKind::LangevinExample) {
        for (std::size_t i = 0; i < n; ++i) keps[i] = mu_eps_kernel(spec, grid.nodes[i]);
    } else {
        std::vector<double> q(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double s = spec.diffusion(grid.nodes[i]);
            q[i] = 2.0 * spec.drift(grid.nodes[i]) / (s * s);
        }
        const auto expo = cumulative_trapezoid(grid.nodes, q, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const double s = spec.diffusion(grid.nodes[i]);
            keps[i] = std::exp(expo[i]) / (s * s);
        }
    }
    for (std::size_t i = 0; i < n; ++i) kmu[i] = mu_kernel(limit, grid.nodes[i]);

    const double mass_eps = integrate(grid, keps);
    const double mass_mu = integrate(grid, kmu);
    if (!(mass_eps > 0.0) || !(mass_mu > 0.0))
        throw std::runtime_error("invariant_density: vanishing kernel mass");

    // Truncation/resolution audit: the grid mass must reproduce a refined
    // quadrature of the kernel over the full envelope-certified domain.
    if (spec.kind == ModelKind::LangevinExample) {
        const double env = envelope_half_width(spec.alpha, spec.sigma_param);
        const double lo = std::min(grid.lower, -env);
        const double hi = std::max(grid.upper, env);
        const auto panels = static_cast<std::size_t>(period_resolving_panels(hi - lo, spec.eps));
        const double refined = integrate_refined(
            [&](double x) { return mu_eps_kernel(spec, x); }, lo, hi, 1e-12, panels);
        if (std::abs(refined - mass_eps) > 1e-8 * refined)
            throw std::runtime_error(
                "invariant_density: grid mass differs from refined kernel quadrature "
                "(truncation-domain failure)");
    }

    t.mu_eps.resize(n);
    t.mu.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        t.mu_eps[i] = keps[i] / mass_eps;
        t.mu[i] = kmu[i] / mass_mu;
    }

    if (spec.kind == ModelKind::LangevinExample) {
        const double ratio = mass_mu / mass_eps;
        t.sandwich_lo = ratio * std::exp(-1.0 / spec.sigma_param);
        t.sandwich_hi = ratio * std::exp(1.0 / spec.sigma_param);
    } else {
        double lo = 1e300, hi = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = t.mu_eps[i] / t.mu[i];
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        t.sandwich_lo = lo;
        t.sandwich_hi = hi;
    }
    return t;
}

ScaleTable scale_tables(const ModelSpec& spec, const HomogenizedSpec& limit,
                        const QuadratureGrid& grid) {
    ScaleTable t;
    t.grid = grid;
    const std::size_t n = grid.n_nodes;
    const std::size_t anchor = grid.index_of_zero();

    std::vector<double> qeps(n), qmu(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = grid.nodes[i];
        const double se = spec.diffusion(x);
        const double sl = limit.sigma_bar(x);
        qeps[i] = -2.0 * spec.drift(x) / (se * se);
        qmu[i] = -2.0 * limit.b(x) / (sl * sl);
    }
    const auto Geps = cumulative_trapezoid(grid.nodes, qeps, anchor);
    const auto Gmu = cumulative_trapezoid(grid.nodes, qmu, anchor);

    t.fprime_eps.resize(n);
    t.fprime.resize(n);
    t.rho_eps_sq.resize(n);
    t.rho_sq.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        t.fprime_eps[i] = std::exp(Geps[i]);
        t.fprime[i] = std::exp(Gmu[i]);
        const double se = spec.diffusion(grid.nodes[i]);
        const double sl = limit.sigma_bar(grid.nodes[i]);
        t.rho_eps_sq[i] = 1.0 / (se * se * t.fprime_eps[i]);
        t.rho_sq[i] = 1.0 / (sl * sl * t.fprime[i]);
    }
    t.f_eps = cumulative_trapezoid(grid.nodes, t.fprime_eps, anchor);
    t.f = cumulative_trapezoid(grid.nodes, t.fprime, anchor);

    for (std::size_t i = 1; i < n; ++i) {
        if (!(t.f_eps[i] > t.f_eps[i - 1]) || !(t.f[i] > t.f[i - 1]))
            throw std::runtime_error("scale_tables: cumulative scale function not strictly increasing");
    }

    // C_rho via the substitution identity: integral of dz/(sigma^2 f') in x.
    t.C_rho_eps = integrate(grid, t.rho_eps_sq);
    t.C_rho = integrate(grid, t.rho_sq);
    if (!(t.C_rho_eps > 0.0) || !std::isfinite(t.C_rho_eps) || !(t.C_rho > 0.0) ||
        !std::isfinite(t.C_rho))
        throw std::runtime_error("scale_tables: speed normalization not positive finite");
    return t;
}

double harmonicity_residual(const ModelSpec& spec, const QuadratureGrid& grid) {
    return harmonicity_core([&spec](double x) { return spec.drift(x); },
                            [&spec](double x) { return spec.diffusion(x); }, grid);
}

double harmonicity_residual(const HomogenizedSpec& limit, const QuadratureGrid& grid) {
    return harmonicity_core([&limit](double x) { return limit.b(x); },
                            [&limit](double x) { return limit.sigma_bar(x); }, grid);
}

double expected_exit_time(double a, double b, double x, const SpeedView& speed) {
    if (!(a < b)) throw std::invalid_argument("expected_exit_time: need a < b");
    if (x < a || x > b) throw std::invalid_argument("expected_exit_time: x outside [a, b]");
    if (x == a || x == b) return 0.0;
    const double upper = weighted_speed_integral(speed, x, b, 2.0 * b, -2.0);  // 2(b - z)
    const double lower = weighted_speed_integral(speed, a, x, -2.0 * a, 2.0);  // 2(z - a)
    return (x - a) / (b - a) * upper + (b - x) / (b - a) * lower;
}

double expected_hitting_time(double x, double y, const SpeedView& speed) {
    if (x == y) return 0.0;
    const auto& u = speed.u;
    double value = 0.0, tail_est = 0.0;
    if (y < x) {
        const double mass_above = weighted_speed_integral(speed, x, u.back(), 1.0, 0.0);
        const double inner = weighted_speed_integral(speed, y, x, -y, 1.0); // (z - y)
        value = 2.0 * (x - y) * mass_above + 2.0 * inner;
        if (speed.tail_rate_upper > 0.0)
            tail_est = 2.0 * (x - y) * speed.rho_sq.back() / speed.tail_rate_upper;
        else
            tail_est = value; // no decaying envelope: the tail is not certifiable
    } else {
        const double mass_below = weighted_speed_integral(speed, u.front(), x, 1.0, 0.0);
        const double inner = weighted_speed_integral(speed, x, y, y, -1.0); // (y - z)
        value = 2.0 * (y - x) * mass_below + 2.0 * inner;
        if (speed.tail_rate_lower > 0.0)
            tail_est = 2.0 * (y - x) * speed.rho_sq.front() / speed.tail_rate_lower;
        else
            tail_est = value;
    }
    if (tail_est > 0.01 * value)
        throw std::runtime_error("expected_hitting_time: tail truncation estimate above 1% (grid too small)");
    return value;
}

double char_fn_mu(double theta, double sigma_eff) {
    if (!(theta > 0.0)) throw std::invalid_argument("char_fn_mu: theta must be positive");
    return std::exp(-0.5 * sigma_eff / theta);
}

std::complex<double> char_fn_mu_eps(const DensityTable& table) {
    const double period = 2.0 * kPi * table.eps;
    const double density =
        static_cast<double>(table.grid.n_nodes - 1) / (table.grid.upper - table.grid.lower);
    if (density * period < 20.0)
        throw std::invalid_argument("char_fn_mu_eps: fewer than 20 nodes per fast period (aliasing risk)");
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < table.grid.n_nodes; ++i) {
        const double x = table.grid.nodes[i];
        const double w = table.grid.weights[i] * table.mu_eps[i];
        re += w * std::cos(x);
        im += w * std::sin(x);
    }
    return {re, im};
}

double mean_under_mu_eps(const ModelSpec& spec, const std::function<double(double)>& phi,
                         double half_width, double tol) {
    if (spec.kind == ModelKind::LangevinExample)
        half_width = std::max(half_width, envelope_half_width(spec.alpha, spec.sigma_param));
    const auto panels =
        static_cast<std::size_t>(period_resolving_panels(2.0 * half_width, spec.eps));
    // Numerator and denominator share nodes at every refinement level, so a
    // constant phi gives the exact ratio 1.
    std::size_t p = panels;
    double prev = 0.0;
    for (int iter = 0; iter < 22 && p < (1u << 23); ++iter) {
        const QuadratureGrid g = make_simpson_grid(-half_width, half_width, 2 * p + 1);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < g.n_nodes; ++i) {
            const double k = g.weights[i] * mu_eps_kernel(spec, g.nodes[i]);
            num += k * phi(g.nodes[i]);
            den += k;
        }
        const double ratio = num / den;
        if (iter > 0 && std::abs(ratio - prev) <= tol * (1.0 + std::abs(ratio))) return ratio;
        prev = ratio;
        p *= 2;
    }
    throw std::runtime_error("mean_under_mu_eps: no convergence");
}

double mean_under_mu(const HomogenizedSpec& limit, const std::function<double(double)>& phi,
                     double half_width, double tol) {
    half_width = std::max(half_width, envelope_half_width(limit.theta, limit.sigma_eff));
    std::size_t p = 128;
    double prev = 0.0;
    for (int iter = 0; iter < 22 && p < (1u << 23); ++iter) {
        const QuadratureGrid g = make_simpson_grid(-half_width, half_width, 2 * p + 1);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < g.n_nodes; ++i) {
            const double k = g.weights[i] * mu_kernel(limit, g.nodes[i]);
            num += k * phi(g.nodes[i]);
            den += k;
        }
        const double ratio = num / den;
        if (iter > 0 && std::abs(ratio - prev) <= tol * (1.0 + std::abs(ratio))) return ratio;
        prev = ratio;
        p *= 2;
    }
    throw std::runtime_error("mean_under_mu: no convergence");
}

void write_tables_csv(std::ostream& os, const DensityTable& density, const ScaleTable& scale) {
    if (density.grid.n_nodes != scale.grid.n_nodes ||
        density.grid.lower != scale.grid.lower || density.grid.upper != scale.grid.upper)
        throw std::invalid_argument("write_tables_csv: tables built on different grids");
    os << "x,mu,mu_eps,f,f_eps,rho_sq,rho_eps_sq\n";
    char line[256];
    for (std::size_t i = 0; i < density.grid.n_nodes; ++i) {
        std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      density.grid.nodes[i], density.mu[i], density.mu_eps[i], scale.f[i],
                      scale.f_eps[i], scale.rho_sq[i], scale.rho_eps_sq[i]);
        os << line;
    }
}

} // namespace mshom
