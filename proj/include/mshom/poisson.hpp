#ifndef MSHOM_POISSON_HPP
#define MSHOM_POISSON_HPP

#include <functional>
#include <iosfwd>
#include <vector>

#include "mshom/analytic.hpp"
#include "mshom/model.hpp"

namespace mshom {

enum class DensityChannel { MuEps, Mu };

// Drift/diffusion pair the Poisson equation -A Phi = h is solved against:
// the eps-model (b_eps, sigma) or the homogenized limit (b, sigma_bar).
struct GeneratorView {
    DensityChannel channel = DensityChannel::Mu;
    std::function<double(double)> drift;
    std::function<double(double)> diffusion;
};

GeneratorView generator_view(const ModelSpec& spec);
GeneratorView generator_view(const HomogenizedSpec& limit);

// Test function centered against one density column. The mean is subtracted
// with the same trapezoid rule the solver uses for its inner integral, so the
// cumulative integral of h * mu returns to zero at the right boundary exactly.
struct CenteredTest {
    DensityChannel centered_against = DensityChannel::Mu;
    std::vector<double> values;   // centered values at the density grid nodes
    double subtracted_mean = 0.0;
    double sup_norm = 0.0;
};

CenteredTest center_test(const std::function<double(double)>& h, const DensityTable& density,
                         DensityChannel against);

// Gridded solution of -A Phi = h with Phi(0) = 0, its derivative, the
// asymptotic variance it induces and the Dirichlet-form audit
// |int (sigma^2/2) Phi'^2 mu - int Phi h mu|. phi_prime_sup is taken over the
// mu-supported bulk (nodes with mu >= 1e-10 max mu); beyond it the pointwise
// derivative of a truncated solve carries no information.
struct PoissonSolution {
    QuadratureGrid grid;
    std::vector<double> Phi;
    std::vector<double> Phi_prime;
    double tau_sq = 0.0;
    double dirichlet_gap = 0.0;
    double phi_prime_sup = 0.0;
};

PoissonSolution solve_poisson(const CenteredTest& test, const DensityTable& density,
                              const GeneratorView& view);

// tau^2 = int sigma^2 Phi'^2 mu dx (trapezoid, same rule as the solver);
// recomputes and stores the Dirichlet gap, throwing if it exceeds
// 1e-5 * (1 + tau^2).
double asymptotic_variance(PoissonSolution& sol, const DensityTable& density,
                           const GeneratorView& view, const CenteredTest& test);

// Both channels of h(x) = e^{ix} - mean solved independently; tau_sq is the
// sum of the channel variances. The cos channel alone normalizes the section-3
// estimator statistics.
struct ComplexPoissonSolution {
    PoissonSolution re;
    PoissonSolution im;
    double tau_sq = 0.0;
};

ComplexPoissonSolution solve_poisson_characteristic(const DensityTable& density,
                                                    const GeneratorView& view);

// CSV export, columns: x, Phi, Phi_prime.
void write_solution_csv(std::ostream& os, const PoissonSolution& sol);

} // namespace mshom

#endif
