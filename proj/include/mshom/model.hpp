#ifndef MSHOM_MODEL_HPP
#define MSHOM_MODEL_HPP

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "mshom/quadrature.hpp"

namespace mshom {

enum class ModelKind { GeneralMultiscale, LangevinExample };

// Multiscale SDE  dX = [f0(X) + (1/eps) f1(X/eps)] dt + sigma(X) dW.
// The Langevin instance is dX = [-alpha X - (1/eps) sin(X/eps)] dt + sqrt(2 sigma) dW,
// stored through (alpha, sigma_param, eps) and evaluated inline on the hot path.
// Evaluator callbacks must be pure functions of their argument; specs are
// immutable after construction and safe to share across workers.
struct ModelSpec {
    ModelKind kind = ModelKind::LangevinExample;
    std::function<double(double)> f0;
    std::function<double(double)> f1;     // periodic fast drift, period f1_period
    double f1_period = 1.0;
    std::function<double(double)> sigma;  // diffusion coefficient, units x * time^{-1/2}
    double eps = 1.0;
    double x0 = 0.0;

    // Langevin parameters (valid when kind == LangevinExample).
    double alpha = 1.0;
    double sigma_param = 1.0;

    double drift(double x) const;
    double diffusion(double x) const;
};

// Homogenized limit  dX = b(X) dt + sigma_bar(X) dW.
// For the Langevin instance: b(x) = -theta x, sigma_bar = sqrt(2 sigma_eff),
// theta = alpha K, sigma_eff = sigma K.
struct HomogenizedSpec {
    std::function<double(double)> b;
    std::function<double(double)> sigma_bar;
    double K = 1.0;
    double theta = 0.0;
    double sigma_eff = 0.0;

    double drift(double x) const { return b(x); }
    double diffusion(double x) const { return sigma_bar(x); }
};

// Horizon schedule T_eps = C * eps^{-eta} along a decreasing eps list.
struct ScheduleConfig {
    std::vector<double> eps_values;
    double horizon_constant = 1.0;
    double horizon_exponent = 1.5;

    double horizon(double eps) const;
    bool valid() const; // eps decreasing and positive, C > 0, eta > 0
};

ModelSpec langevin_model(double alpha, double sigma, double eps, double x0 = 0.0);
ModelSpec general_model(std::function<double(double)> f0, std::function<double(double)> f1,
                        double f1_period, std::function<double(double)> sigma, double eps,
                        double x0 = 0.0);

// Ornstein-Uhlenbeck spec dX = -theta X dt + sqrt(2 sigma_eff) dW, used both as
// the Langevin homogenized limit and as a standalone reference model.
HomogenizedSpec ou_limit(double theta, double sigma_eff);

// Homogenized limit of a Langevin instance given its cell factor K.
HomogenizedSpec homogenize_langevin(const ModelSpec& spec, double K);

// drift_eps evaluated with an overflow guard: non-finite values throw.
double drift_eps(const ModelSpec& spec, double x);

// Default half-width of the working domain [-L, L] for grid sweeps:
// L = max(S + 5, 6 sqrt(sigma/alpha)) for the Langevin instance.
double working_half_width(const ModelSpec& spec, double S = 1.0);

struct AssumptionReport {
    bool holds = false;
    double S = 0.0;
    double gamma = 0.0;
    std::vector<double> violating_nodes;
    std::string summary() const;
};

// Numerical sweep of the drift-dominance condition
// sign(y) b(y) / sigma_bar(y)^2 <= -gamma for every grid node with |y| > S.
AssumptionReport check_assumption_clt(const HomogenizedSpec& limit, double S, double gamma,
                                      const QuadratureGrid& grid);

// Sweeps of standing assumptions for a concrete instance: sigma bounded away
// from zero on the grid and f1 periodic with the declared period. Throws
// std::runtime_error with a diagnostic on failure.
void validate_model(const ModelSpec& spec, const QuadratureGrid& grid);

} // namespace mshom

#endif
