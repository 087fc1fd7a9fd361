#ifndef MSHOM_QUADRATURE_HPP
#define MSHOM_QUADRATURE_HPP

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace mshom {

enum class QuadScheme { CompositeSimpson, GaussLegendrePanels };

// Node/weight table shared by every analytic integral and lookup table.
// Weights sum to (upper - lower); Simpson grids are uniform and keep a node
// at every multiple of the spacing, so symmetric grids contain x = 0.
struct QuadratureGrid {
    double lower = 0.0;
    double upper = 0.0;
    std::size_t n_nodes = 0;
    QuadScheme scheme = QuadScheme::CompositeSimpson;
    std::vector<double> nodes;
    std::vector<double> weights;

    double spacing() const; // uniform grids only
    std::size_t index_of_zero() const; // throws if 0 is not a node
    bool uniform() const { return scheme == QuadScheme::CompositeSimpson; }
};

// n_nodes must be odd and >= 3.
QuadratureGrid make_simpson_grid(double lower, double upper, std::size_t n_nodes);

// Symmetric Simpson grid on [-half_width, half_width] with spacing <= target.
QuadratureGrid make_symmetric_grid(double half_width, double target_spacing);

// n_panels 8-point Gauss-Legendre panels of equal width.
QuadratureGrid make_gauss_legendre_grid(double lower, double upper, std::size_t n_panels);

double integrate(const QuadratureGrid& grid, const std::vector<double>& values);
double integrate(const QuadratureGrid& grid, const std::function<double(double)>& f);

// Trapezoid weights on the grid nodes (used where cumulative integrals must
// telescope exactly against pointwise sums).
double integrate_trapezoid(const std::vector<double>& nodes, const std::vector<double>& values);

// Running trapezoid integral anchored to zero at nodes[anchor].
std::vector<double> cumulative_trapezoid(const std::vector<double>& nodes,
                                         const std::vector<double>& values,
                                         std::size_t anchor);

// Composite Simpson with panel doubling until two consecutive refinements
// agree within tol (relative). Throws on non-convergence.
double integrate_refined(const std::function<double(double)>& f, double lower, double upper,
                         double tol, std::size_t min_panels = 64);

} // namespace mshom

#endif
