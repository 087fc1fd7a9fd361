#include "mshom/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace mshom {

double ModelSpec::drift(double x) const {
    if (kind == ModelKind::LangevinExample)
        return -alpha * x - std::sin(x / eps) / eps;
    return f0(x) + f1(x / eps) / eps;
}

double ModelSpec::diffusion(double x) const {
    if (kind == ModelKind::LangevinExample)
        return std::sqrt(2.0 * sigma_param);
    return sigma(x);
}

double ScheduleConfig::horizon(double eps) const {
    return horizon_constant * std::pow(eps, -horizon_exponent);
}

bool ScheduleConfig::valid() const {
    if (eps_values.empty() || horizon_constant <= 0.0 || horizon_exponent <= 0.0) return false;
    for (std::size_t i = 0; i < eps_values.size(); ++i) {
        if (!(eps_values[i] > 0.0)) return false;
        if (i > 0 && !(eps_values[i] < eps_values[i - 1])) return false;
    }
    return true;
}

ModelSpec langevin_model(double alpha, double sigma, double eps, double x0) {
    if (!(alpha > 0.0) || !(sigma > 0.0) || !(eps > 0.0))
        throw std::invalid_argument("langevin_model: alpha, sigma, eps must be positive");
    ModelSpec m;
    m.kind = ModelKind::LangevinExample;
    m.alpha = alpha;
    m.sigma_param = sigma;
    m.eps = eps;
    m.x0 = x0;
    m.f0 = [alpha](double x) { return -alpha * x; };
    m.f1 = [](double y) { return -std::sin(y); };
    m.f1_period = 2.0 * std::numbers::pi;
    const double coeff = std::sqrt(2.0 * sigma);
    m.sigma = [coeff](double) { return coeff; };
    return m;
}

ModelSpec general_model(std::function<double(double)> f0, std::function<double(double)> f1,
                        double f1_period, std::function<double(double)> sigma, double eps,
                        double x0) {
    if (!(eps > 0.0)) throw std::invalid_argument("general_model: eps must be positive");
    if (!(f1_period > 0.0)) throw std::invalid_argument("general_model: f1_period must be positive");
    ModelSpec m;
    m.kind = ModelKind::GeneralMultiscale;
    m.f0 = std::move(f0);
    m.f1 = std::move(f1);
    m.f1_period = f1_period;
    m.sigma = std::move(sigma);
    m.eps = eps;
    m.x0 = x0;
    return m;
}

HomogenizedSpec ou_limit(double theta, double sigma_eff) {
    if (!(theta > 0.0) || !(sigma_eff > 0.0))
        throw std::invalid_argument("ou_limit: theta and sigma_eff must be positive");
    HomogenizedSpec h;
    h.theta = theta;
    h.sigma_eff = sigma_eff;
    h.K = 1.0;
    h.b = [theta](double x) { return -theta * x; };
    const double coeff = std::sqrt(2.0 * sigma_eff);
    h.sigma_bar = [coeff](double) { return coeff; };
    return h;
}

HomogenizedSpec homogenize_langevin(const ModelSpec& spec, double K) {
    if (spec.kind != ModelKind::LangevinExample)
        throw std::invalid_argument("homogenize_langevin: spec is not a Langevin instance");
    if (!(K > 0.0) || K > 1.0 + 1e-12)
        throw std::invalid_argument("homogenize_langevin: K must lie in (0, 1]");
    HomogenizedSpec h = ou_limit(spec.alpha * K, spec.sigma_param * K);
    h.K = K;
    return h;
}

double drift_eps(const ModelSpec& spec, double x) {
    const double v = spec.drift(x);
    if (!std::isfinite(v)) throw std::domain_error("drift_eps: non-finite drift (domain overflow)");
    return v;
}

double working_half_width(const ModelSpec& spec, double S) {
    if (spec.kind == ModelKind::LangevinExample)
        return std::max(S + 5.0, 6.0 * std::sqrt(spec.sigma_param / spec.alpha));
    return S + 5.0;
}

std::string AssumptionReport::summary() const {
    std::ostringstream os;
    os << "assumption (CLT) with S=" << S << " gamma=" << gamma
       << (holds ? " holds" : " fails") << "; violations=" << violating_nodes.size();
    return os.str();
}

AssumptionReport check_assumption_clt(const HomogenizedSpec& limit, double S, double gamma,
                                      const QuadratureGrid& grid) {
    if (!(S > 0.0) || !(gamma > 0.0))
        throw std::invalid_argument("check_assumption_clt: S and gamma must be positive");
    AssumptionReport rep;
    rep.S = S;
    rep.gamma = gamma;
    std::size_t beyond = 0;
    for (double y : grid.nodes) {
        if (std::abs(y) <= S) continue;
        ++beyond;
        const double sb = limit.sigma_bar(y);
        const double ratio = (y > 0.0 ? 1.0 : -1.0) * limit.b(y) / (sb * sb);
        if (!(ratio <= -gamma)) rep.violating_nodes.push_back(y);
    }
    if (beyond == 0)
        throw std::invalid_argument("check_assumption_clt: no grid nodes beyond |y| = S");
    rep.holds = rep.violating_nodes.empty();
    return rep;
}

void validate_model(const ModelSpec& spec, const QuadratureGrid& grid) {
    if (!(spec.eps > 0.0)) throw std::runtime_error("model check failed: eps <= 0");
    double lo = 1e300, hi = 0.0;
    for (double x : grid.nodes) {
        const double s = spec.diffusion(x);
        lo = std::min(lo, s);
        hi = std::max(hi, s);
    }
    if (!(lo > 0.0) || !std::isfinite(hi))
        throw std::runtime_error("model check failed: sigma is not bounded in (0, inf) on the domain");
    if (spec.kind == ModelKind::GeneralMultiscale && spec.f1) {
        const double P = spec.f1_period;
        for (int k = 0; k < 64; ++k) {
            const double y = -2.0 * P + 4.0 * P * static_cast<double>(k) / 63.0;
            const double a = spec.f1(y);
            const double b = spec.f1(y + P);
            if (std::abs(b - a) > 1e-12 * (1.0 + std::abs(a)))
                throw std::runtime_error("model check failed: f1 is not periodic with the declared period");
        }
    }
}

} // namespace mshom
