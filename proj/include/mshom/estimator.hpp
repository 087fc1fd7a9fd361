#ifndef MSHOM_ESTIMATOR_HPP
#define MSHOM_ESTIMATOR_HPP

#include <complex>
#include <cstdint>
#include <vector>

#include "mshom/model.hpp"

namespace mshom {

// Characteristic-function minimum-distance estimator of the homogenized drift
// parameter theta with sigma_eff = sigma K treated as known. The reference
// values exp(-sigma_eff/(2 theta)) are real in (0,1), so the squared distance
// to a complex time average splits and the argmin only sees the clamped real
// part.
struct EstimatorConfig {
    double sigma_eff = 0.0;
    double theta_min = 0.01;
    double theta_max = 10.0;
    double projection_floor = 1e-6; // delta_c clamp for Re(c_hat)

    void validate() const;
};

struct MdeResult {
    double theta_hat = 0.0;
    bool boundary = false; // clamped at the projection floor or a Theta bound
};

struct EstimateRecord {
    double eps = 0.0;
    double T = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t replicate_id = 0;
    std::complex<double> c_hat;
    double theta_hat = 0.0;
    double standardized_error = 0.0;
    bool boundary = false;
};

MdeResult mde_estimate(std::complex<double> c_hat, const EstimatorConfig& cfg);

// |g'(v0)| * tau with g(v) = -sigma_eff/(2 log v) and v0 = exp(-sigma_eff/(2 theta0)),
// hence g'(v0) = 2 theta0^2 exp(sigma_eff/(2 theta0)) / sigma_eff.
double delta_method_std(double theta0, const EstimatorConfig& cfg, double tau);

struct ConsistencyPoint {
    double eps = 0.0;
    double T = 0.0;
    double median_rel_error = 0.0;
    int boundary_count = 0;
    std::vector<EstimateRecord> records;
};

struct ConsistencyReport {
    double theta0 = 0.0;
    bool schedule_valid = false;
    bool errors_nonincreasing = false;
    std::vector<ConsistencyPoint> points;
};

ConsistencyReport consistency_experiment(double alpha, double sigma, double x0,
                                         const ScheduleConfig& schedule,
                                         const EstimatorConfig& cfg, int n_replicates,
                                         std::uint64_t base_seed, int workers);

// Summarizing stage of the consistency experiment, separated so records from
// any source (including exact characteristic values) flow through the same
// decision logic.
ConsistencyReport summarize_consistency(std::vector<ConsistencyPoint> points, double theta0,
                                        bool schedule_valid);

struct NormalityReport {
    double theta0 = 0.0;
    double tau = 0.0;
    double scale = 0.0; // delta-method std of sqrt(T)(theta_hat - theta0)
    double ks = 0.0;
    double ks_critical = 0.0;
    bool degenerate = false;
    std::vector<EstimateRecord> records;
    std::vector<double> standardized;
};

// Requires n_replicates >= 50 (underpowered runs are rejected).
NormalityReport normality_experiment(double alpha, double sigma, double x0, double eps, double T,
                                     int n_replicates, double tau, double theta0,
                                     const EstimatorConfig& cfg, std::uint64_t base_seed,
                                     int workers);

NormalityReport summarize_normality(std::vector<EstimateRecord> records, double tau, double theta0,
                                    double T, const EstimatorConfig& cfg);

} // namespace mshom

#endif
