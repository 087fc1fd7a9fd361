#include "mshom/poisson.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace mshom {

namespace {

const std::vector<double>& column(const DensityTable& d, DensityChannel ch) {
    return ch == DensityChannel::MuEps ? d.mu_eps : d.mu;
}

double trapezoid_mean(const QuadratureGrid& g, const std::vector<double>& hv,
                      const std::vector<double>& mu) {
    std::vector<double> num(g.n_nodes), den(g.n_nodes);
    for (std::size_t i = 0; i < g.n_nodes; ++i) {
        num[i] = hv[i] * mu[i];
        den[i] = mu[i];
    }
    return integrate_trapezoid(g.nodes, num) / integrate_trapezoid(g.nodes, den);
}

} // namespace

GeneratorView generator_view(const ModelSpec& spec) {
    GeneratorView v;
    v.channel = DensityChannel::MuEps;
    v.drift = [&spec](double x) { return spec.drift(x); };
    v.diffusion = [&spec](double x) { return spec.diffusion(x); };
    return v;
}

GeneratorView generator_view(const HomogenizedSpec& limit) {
    GeneratorView v;
    v.channel = DensityChannel::Mu;
    v.drift = limit.b;
    v.diffusion = limit.sigma_bar;
    return v;
}

CenteredTest center_test(const std::function<double(double)>& h, const DensityTable& density,
                         DensityChannel against) {
    CenteredTest t;
    t.centered_against = against;
    const auto& g = density.grid;
    const auto& mu = column(density, against);
    std::vector<double> hv(g.n_nodes);
    for (std::size_t i = 0; i < g.n_nodes; ++i) hv[i] = h(g.nodes[i]);
    t.subtracted_mean = trapezoid_mean(g, hv, mu);
    t.values.resize(g.n_nodes);
    for (std::size_t i = 0; i < g.n_nodes; ++i) {
        t.values[i] = hv[i] - t.subtracted_mean;
        t.sup_norm = std::max(t.sup_norm, std::abs(t.values[i]));
    }
    if (!std::isfinite(t.sup_norm))
        throw std::runtime_error("center_test: test function unbounded on the grid");
    return t;
}

PoissonSolution solve_poisson(const CenteredTest& test, const DensityTable& density,
                              const GeneratorView& view) {
    if (test.centered_against != view.channel)
        throw std::invalid_argument("solve_poisson: test centered against a different density channel");
    const auto& g = density.grid;
    if (test.values.size() != g.n_nodes)
        throw std::invalid_argument("solve_poisson: test not tabulated on the density grid");
    const auto& mu = column(density, view.channel);

    PoissonSolution sol;
    sol.grid = g;
    const std::size_t n = g.n_nodes;

    // Inner integral H(y) = int_{-L}^{y} h mu, anchored to 0 at the left edge.
    std::vector<double> hmu(n);
    for (std::size_t i = 0; i < n; ++i) hmu[i] = test.values[i] * mu[i];
    auto H = cumulative_trapezoid(g.nodes, hmu, 0);
    const double mass_drift = std::abs(H.back());
    if (mass_drift > 1e-6)
        throw std::runtime_error("solve_poisson: centering drift at the right boundary (|H(L)| > 1e-6)");

    sol.Phi_prime.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = view.diffusion(g.nodes[i]);
        sol.Phi_prime[i] = -2.0 * H[i] / (s * s * mu[i]);
    }
    sol.Phi = cumulative_trapezoid(g.nodes, sol.Phi_prime, g.index_of_zero());

    double mu_max = 0.0;
    for (double m : mu) mu_max = std::max(mu_max, m);
    for (std::size_t i = 0; i < n; ++i)
        if (mu[i] >= 1e-10 * mu_max)
            sol.phi_prime_sup = std::max(sol.phi_prime_sup, std::abs(sol.Phi_prime[i]));

    asymptotic_variance(sol, density, view, test);
    return sol;
}

double asymptotic_variance(PoissonSolution& sol, const DensityTable& density,
                           const GeneratorView& view, const CenteredTest& test) {
    const auto& g = density.grid;
    const auto& mu = column(density, view.channel);
    const std::size_t n = g.n_nodes;
    std::vector<double> var_term(n), dirichlet(n), cross(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = view.diffusion(g.nodes[i]);
        const double p = sol.Phi_prime[i];
        var_term[i] = s * s * p * p * mu[i];
        dirichlet[i] = 0.5 * var_term[i];
        cross[i] = sol.Phi[i] * test.values[i] * mu[i];
    }
    sol.tau_sq = integrate_trapezoid(g.nodes, var_term);
    sol.dirichlet_gap =
        std::abs(integrate_trapezoid(g.nodes, dirichlet) - integrate_trapezoid(g.nodes, cross));
    if (sol.dirichlet_gap > 1e-5 * (1.0 + sol.tau_sq))
        throw std::runtime_error("asymptotic_variance: Dirichlet-form gap signals an inconsistent solve");
    return sol.tau_sq;
}

ComplexPoissonSolution solve_poisson_characteristic(const DensityTable& density,
                                                    const GeneratorView& view) {
    ComplexPoissonSolution out;
    const auto re = center_test([](double x) { return std::cos(x); }, density, view.channel);
    const auto im = center_test([](double x) { return std::sin(x); }, density, view.channel);
    out.re = solve_poisson(re, density, view);
    out.im = solve_poisson(im, density, view);
    out.tau_sq = out.re.tau_sq + out.im.tau_sq;
    return out;
}

void write_solution_csv(std::ostream& os, const PoissonSolution& sol) {
    os << "x,Phi,Phi_prime\n";
    char line[128];
    for (std::size_t i = 0; i < sol.grid.n_nodes; ++i) {
        std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g\n", sol.grid.nodes[i], sol.Phi[i],
                      sol.Phi_prime[i]);
        os << line;
    }
}

} // namespace mshom
