#include "mshom/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace mshom {

namespace {

// 8-point Gauss-Legendre abscissae/weights on [-1, 1].
constexpr double kGlNodes[8] = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363};
constexpr double kGlWeights[8] = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

} // namespace

double QuadratureGrid::spacing() const {
    if (!uniform() || n_nodes < 2) throw std::logic_error("spacing(): grid is not uniform");
    return (upper - lower) / static_cast<double>(n_nodes - 1);
}

std::size_t QuadratureGrid::index_of_zero() const {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (std::abs(nodes[i]) < 1e-12) return i;
    }
    throw std::logic_error("grid has no node at x = 0");
}

QuadratureGrid make_simpson_grid(double lower, double upper, std::size_t n_nodes) {
    if (!(lower < upper)) throw std::invalid_argument("make_simpson_grid: lower must be < upper");
    if (n_nodes < 3 || n_nodes % 2 == 0)
        throw std::invalid_argument("make_simpson_grid: n_nodes must be odd and >= 3");
    QuadratureGrid g;
    g.lower = lower;
    g.upper = upper;
    g.n_nodes = n_nodes;
    g.scheme = QuadScheme::CompositeSimpson;
    g.nodes.resize(n_nodes);
    g.weights.resize(n_nodes);
    const double h = (upper - lower) / static_cast<double>(n_nodes - 1);
    for (std::size_t i = 0; i < n_nodes; ++i) {
        g.nodes[i] = lower + h * static_cast<double>(i);
        if (i == 0 || i + 1 == n_nodes)
            g.weights[i] = h / 3.0;
        else
            g.weights[i] = (i % 2 == 1) ? 4.0 * h / 3.0 : 2.0 * h / 3.0;
    }
    g.nodes.back() = upper;
    return g;
}

QuadratureGrid make_symmetric_grid(double half_width, double target_spacing) {
    if (!(half_width > 0.0) || !(target_spacing > 0.0))
        throw std::invalid_argument("make_symmetric_grid: arguments must be positive");
    auto half_steps = static_cast<std::size_t>(std::ceil(half_width / target_spacing));
    if (half_steps < 1) half_steps = 1;
    return make_simpson_grid(-half_width, half_width, 2 * half_steps + 1);
}

QuadratureGrid make_gauss_legendre_grid(double lower, double upper, std::size_t n_panels) {
    if (!(lower < upper)) throw std::invalid_argument("make_gauss_legendre_grid: lower must be < upper");
    if (n_panels == 0) throw std::invalid_argument("make_gauss_legendre_grid: need at least one panel");
    QuadratureGrid g;
    g.lower = lower;
    g.upper = upper;
    g.n_nodes = 8 * n_panels;
    g.scheme = QuadScheme::GaussLegendrePanels;
    g.nodes.reserve(g.n_nodes);
    g.weights.reserve(g.n_nodes);
    const double width = (upper - lower) / static_cast<double>(n_panels);
    for (std::size_t p = 0; p < n_panels; ++p) {
        const double a = lower + width * static_cast<double>(p);
        const double mid = a + 0.5 * width;
        for (int k = 0; k < 8; ++k) {
            g.nodes.push_back(mid + 0.5 * width * kGlNodes[k]);
            g.weights.push_back(0.5 * width * kGlWeights[k]);
        }
    }
    return g;
}

double integrate(const QuadratureGrid& grid, const std::vector<double>& values) {
    if (values.size() != grid.n_nodes) throw std::invalid_argument("integrate: size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) acc += grid.weights[i] * values[i];
    return acc;
}

double integrate(const QuadratureGrid& grid, const std::function<double(double)>& f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < grid.n_nodes; ++i) acc += grid.weights[i] * f(grid.nodes[i]);
    return acc;
}

double integrate_trapezoid(const std::vector<double>& nodes, const std::vector<double>& values) {
    if (nodes.size() != values.size() || nodes.size() < 2)
        throw std::invalid_argument("integrate_trapezoid: bad sizes");
    double acc = 0.0;
    for (std::size_t i = 1; i < nodes.size(); ++i)
        acc += 0.5 * (nodes[i] - nodes[i - 1]) * (values[i] + values[i - 1]);
    return acc;
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& nodes,
                                         const std::vector<double>& values,
                                         std::size_t anchor) {
    if (nodes.size() != values.size() || anchor >= nodes.size())
        throw std::invalid_argument("cumulative_trapezoid: bad sizes");
    std::vector<double> out(nodes.size());
    out[anchor] = 0.0;
    for (std::size_t i = anchor + 1; i < nodes.size(); ++i)
        out[i] = out[i - 1] + 0.5 * (nodes[i] - nodes[i - 1]) * (values[i] + values[i - 1]);
    for (std::size_t i = anchor; i-- > 0;)
        out[i] = out[i + 1] - 0.5 * (nodes[i + 1] - nodes[i]) * (values[i + 1] + values[i]);
    return out;
}

double integrate_refined(const std::function<double(double)>& f, double lower, double upper,
                         double tol, std::size_t min_panels) {
    if (!(lower < upper)) throw std::invalid_argument("integrate_refined: lower must be < upper");
    if (min_panels < 2) min_panels = 2;

    auto simpson = [&](std::size_t panels) {
        const double h = (upper - lower) / static_cast<double>(2 * panels);
        double odd = 0.0, even = 0.0;
        for (std::size_t i = 1; i < 2 * panels; ++i) {
            const double x = lower + h * static_cast<double>(i);
            if (i % 2 == 1)
                odd += f(x);
            else
                even += f(x);
        }
        return h / 3.0 * (f(lower) + f(upper) + 4.0 * odd + 2.0 * even);
    };

    std::size_t panels = min_panels;
    double prev = simpson(panels);
    for (int iter = 0; iter < 22; ++iter) {
        panels *= 2;
        const double cur = simpson(panels);
        if (std::abs(cur - prev) <= tol * (1.0 + std::abs(cur))) return cur;
        prev = cur;
    }
    throw std::runtime_error("integrate_refined: no convergence within refinement budget");
}

} // namespace mshom
