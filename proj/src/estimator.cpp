#include "mshom/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mshom/sdesim.hpp"
#include "mshom/stats.hpp"

namespace mshom {

void EstimatorConfig::validate() const {
    if (!(sigma_eff > 0.0)) throw std::invalid_argument("EstimatorConfig: sigma_eff must be positive");
    if (!(0.0 < theta_min && theta_min < theta_max))
        throw std::invalid_argument("EstimatorConfig: need 0 < theta_min < theta_max");
    if (!(0.0 < projection_floor && projection_floor < 0.5))
        throw std::invalid_argument("EstimatorConfig: projection floor must lie in (0, 0.5)");
}

MdeResult mde_estimate(std::complex<double> c_hat, const EstimatorConfig& cfg) {
    cfg.validate();
    MdeResult out;
    double r = c_hat.real();
    if (r < cfg.projection_floor) {
        r = cfg.projection_floor;
        out.boundary = true;
    } else if (r > 1.0 - cfg.projection_floor) {
        r = 1.0 - cfg.projection_floor;
        out.boundary = true;
    }
    double theta = -cfg.sigma_eff / (2.0 * std::log(r));
    if (theta < cfg.theta_min) {
        theta = cfg.theta_min;
        out.boundary = true;
    } else if (theta > cfg.theta_max) {
        theta = cfg.theta_max;
        out.boundary = true;
    }
    out.theta_hat = theta;
    return out;
}

double delta_method_std(double theta0, const EstimatorConfig& cfg, double tau) {
    cfg.validate();
    if (!(theta0 > cfg.theta_min && theta0 < cfg.theta_max))
        throw std::invalid_argument("delta_method_std: theta0 must be interior to Theta");
    if (tau < 0.0) throw std::invalid_argument("delta_method_std: tau must be >= 0");
    const double gprime =
        2.0 * theta0 * theta0 * std::exp(0.5 * cfg.sigma_eff / theta0) / cfg.sigma_eff;
    return std::abs(gprime) * tau;
}

namespace {

std::vector<EstimateRecord> run_replicates(double alpha, double sigma, double x0, double eps,
                                           double T, int n_replicates, const EstimatorConfig& cfg,
                                           std::uint64_t base_seed, int workers) {
    const ModelSpec spec = langevin_model(alpha, sigma, eps, x0);
    std::vector<EstimateRecord> records(static_cast<std::size_t>(n_replicates));
    parallel_replicates(n_replicates, workers, [&](int r) {
        PathSimConfig pc;
        pc.dt = eps * eps / 20.0;
        pc.T = T;
        pc.seed = base_seed;
        pc.replicate_id = static_cast<std::uint64_t>(r);
        const ErgodicAccumulator acc = simulate_accumulate(spec, pc, {});
        EstimateRecord rec;
        rec.eps = eps;
        rec.T = T;
        rec.seed = base_seed;
        rec.replicate_id = static_cast<std::uint64_t>(r);
        rec.c_hat = acc.c_hat();
        const MdeResult m = mde_estimate(rec.c_hat, cfg);
        rec.theta_hat = m.theta_hat;
        rec.boundary = m.boundary;
        records[static_cast<std::size_t>(r)] = rec;
    });
    return records;
}

} // namespace

ConsistencyReport summarize_consistency(std::vector<ConsistencyPoint> points, double theta0,
                                        bool schedule_valid) {
    ConsistencyReport rep;
    rep.theta0 = theta0;
    rep.schedule_valid = schedule_valid;
    for (auto& pt : points) {
        std::vector<double> errs;
        errs.reserve(pt.records.size());
        pt.boundary_count = 0;
        for (const auto& r : pt.records) {
            errs.push_back(std::abs(r.theta_hat - theta0) / std::abs(theta0));
            if (r.boundary) ++pt.boundary_count;
        }
        pt.median_rel_error = errs.empty() ? 0.0 : median(errs);
    }
    rep.errors_nonincreasing = true;
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (points[i].median_rel_error > points[i - 1].median_rel_error)
            rep.errors_nonincreasing = false;
    }
    rep.points = std::move(points);
    return rep;
}

ConsistencyReport consistency_experiment(double alpha, double sigma, double x0,
                                         const ScheduleConfig& schedule,
                                         const EstimatorConfig& cfg, int n_replicates,
                                         std::uint64_t base_seed, int workers) {
    cfg.validate();
    if (n_replicates < 1) throw std::invalid_argument("consistency_experiment: need replicates");
    const double theta0 = alpha * cfg.sigma_eff / sigma; // alpha K with sigma_eff = sigma K
    std::vector<ConsistencyPoint> points;
    if (schedule.valid()) {
        for (double eps : schedule.eps_values) {
            ConsistencyPoint pt;
            pt.eps = eps;
            pt.T = schedule.horizon(eps);
            pt.records =
                run_replicates(alpha, sigma, x0, eps, pt.T, n_replicates, cfg, base_seed, workers);
            points.push_back(std::move(pt));
        }
    }
    return summarize_consistency(std::move(points), theta0, schedule.valid());
}

NormalityReport summarize_normality(std::vector<EstimateRecord> records, double tau, double theta0,
                                    double T, const EstimatorConfig& cfg) {
    NormalityReport rep;
    rep.theta0 = theta0;
    rep.tau = tau;
    rep.scale = delta_method_std(theta0, cfg, tau);
    rep.standardized.reserve(records.size());
    const double sqrtT = std::sqrt(T);
    for (auto& r : records) {
        r.standardized_error = sqrtT * (r.theta_hat - theta0) / rep.scale;
        rep.standardized.push_back(r.standardized_error);
    }
    rep.ks = ks_statistic(rep.standardized);
    rep.ks_critical = ks_critical_5pct(rep.standardized.size());
    const double lo = *std::min_element(rep.standardized.begin(), rep.standardized.end());
    const double hi = *std::max_element(rep.standardized.begin(), rep.standardized.end());
    rep.degenerate = (hi - lo) == 0.0;
    rep.records = std::move(records);
    return rep;
}

NormalityReport normality_experiment(double alpha, double sigma, double x0, double eps, double T,
                                     int n_replicates, double tau, double theta0,
                                     const EstimatorConfig& cfg, std::uint64_t base_seed,
                                     int workers) {
    cfg.validate();
    if (n_replicates < 50)
        throw std::invalid_argument("normality_experiment: fewer than 50 replicates (underpowered)");
    auto records = run_replicates(alpha, sigma, x0, eps, T, n_replicates, cfg, base_seed, workers);
    return summarize_normality(std::move(records), tau, theta0, T, cfg);
}

} // namespace mshom
