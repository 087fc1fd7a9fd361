#ifndef MSHOM_ANALYTIC_HPP
#define MSHOM_ANALYTIC_HPP

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <vector>

#include "mshom/model.hpp"
#include "mshom/quadrature.hpp"

namespace mshom {

// Cell-problem and normalization constants of the Langevin instance.
// Z+ and Z- are period averages of exp(+-cos(y)/sigma), K = 1/(Z+ Z-),
// Z and Z_eps normalize the invariant-density kernels on the working domain.
struct CellConstants {
    double Z_plus = 1.0;
    double Z_minus = 1.0;
    double K = 1.0;
    double Z = 0.0;
    double Z_eps = 0.0;
};

// Invariant densities tabulated at grid nodes, normalized so the grid
// quadrature of each column is exactly 1.
struct DensityTable {
    QuadratureGrid grid;
    std::vector<double> mu_eps;
    std::vector<double> mu;
    double sandwich_lo = 0.0; // c_mu with c_mu * mu <= mu_eps
    double sandwich_hi = 0.0; // C_mu with mu_eps <= C_mu * mu
    double eps = 0.0;         // fast scale of the mu_eps column
};

// Scale functions, their derivatives and the induced speed densities, all
// tabulated in original x-coordinates. rho^2 values are the transformed-axis
// speed densities evaluated at u = f(x).
struct ScaleTable {
    QuadratureGrid grid;
    std::vector<double> f_eps;
    std::vector<double> f;
    std::vector<double> fprime_eps;
    std::vector<double> fprime;
    std::vector<double> rho_eps_sq;
    std::vector<double> rho_sq;
    double C_rho_eps = 0.0;
    double C_rho = 0.0;
};

// Transformed-coordinate view used by the exit/hitting formulas: strictly
// increasing nodes u = f(x) with the speed density rho(u)^2 = 1/(sigma f')^2
// evaluated there (the table's rho_sq column divided by f'), plus a local
// exponential fit of the two tail envelopes for truncation-error estimates.
struct SpeedView {
    std::vector<double> u;
    std::vector<double> rho_sq;
    double tail_rate_upper = 0.0; // local decay rate of rho_sq at the upper end
    double tail_rate_lower = 0.0;
};

SpeedView eps_view(const ScaleTable& table);
SpeedView limit_view(const ScaleTable& table);

// Period average sum_{m>=0} (inv_sigma/2)^{2m} / (m!)^2, summed until the term
// drops below tol. Independent series route to the Z+ quadrature.
double bessel_series(double inv_sigma, double tol);

// Half-width at which the Gaussian envelope exp(-alpha x^2 / (2 sigma)) falls
// below 1e-14; whole-line scalar integrals are truncated there.
double envelope_half_width(double alpha, double sigma);

// Quadrature route: Z+- over one period with panel-doubling refinement, K,
// and the kernel normalizations Z, Z_eps over [-L, L].
CellConstants compute_cell_constants(const ModelSpec& spec, double tol);

DensityTable invariant_density(const ModelSpec& spec, const HomogenizedSpec& limit,
                               const QuadratureGrid& grid);

ScaleTable scale_tables(const ModelSpec& spec, const HomogenizedSpec& limit,
                        const QuadratureGrid& grid);

// Max over interior nodes of |b f' + (sigma^2/2) f''| / (1 + |b f'|) with f''
// from a five-point central stencil of the tabulated f'. Uniform grids only.
double harmonicity_residual(const ModelSpec& spec, const QuadratureGrid& grid);
double harmonicity_residual(const HomogenizedSpec& limit, const QuadratureGrid& grid);

// E tau^{(a,b)} starting from x, all in transformed coordinates.
double expected_exit_time(double a, double b, double x, const SpeedView& speed);

// E tau^{y} starting from x in transformed coordinates; tail integrals are
// truncated at the view boundary and the estimated truncation error must stay
// below 1% of the result.
double expected_hitting_time(double x, double y, const SpeedView& speed);

// exp(-sigma_eff / (2 theta)): characteristic value of mu at frequency 1.
double char_fn_mu(double theta, double sigma_eff);

// Grid quadrature of e^{ix} against mu_eps; requires >= 20 nodes per fast
// period 2 pi eps.
std::complex<double> char_fn_mu_eps(const DensityTable& table);

// Mean of phi under the mu_eps kernel by refinement quadrature (reference
// values for the ergodic experiments; Langevin instance only).
double mean_under_mu_eps(const ModelSpec& spec, const std::function<double(double)>& phi,
                         double half_width, double tol);
double mean_under_mu(const HomogenizedSpec& limit, const std::function<double(double)>& phi,
                     double half_width, double tol);

// Kernel exponents of the invariant densities (Langevin instance closed form).
double mu_eps_kernel(const ModelSpec& spec, double x);
double mu_kernel(const HomogenizedSpec& limit, double x);

// CSV export, columns: x, mu, mu_eps, f, f_eps, rho_sq, rho_eps_sq.
void write_tables_csv(std::ostream& os, const DensityTable& density, const ScaleTable& scale);

} // namespace mshom

#endif
