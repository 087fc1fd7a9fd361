#ifndef MSHOM_SDESIM_HPP
#define MSHOM_SDESIM_HPP

#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mshom/model.hpp"
#include "mshom/rng.hpp"

namespace mshom {

// One Euler-Maruyama replicate. The dt rule dt <= eps^2/20 keeps the fast
// drift (Lipschitz constant O(eps^-2)) resolved; T/dt is capped at 2^40.
struct PathSimConfig {
    double dt = 1e-3;
    double T = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t replicate_id = 0;
    bool store_path = false;
    double blow_up_limit = 60.0; // |X| beyond this aborts the replicate

    void validate(double eps) const;
    std::uint64_t n_steps() const;
};

// Streaming left-endpoint Riemann sums along a path: one complex channel for
// e^{iX} plus any registered real test functions. elapsed accumulates dt with
// the same additions as the sums, so a constant test averages to it exactly.
struct ErgodicAccumulator {
    double elapsed = 0.0;
    double sum_cos = 0.0;
    double sum_sin = 0.0;
    std::vector<double> sum_real;
    double last_state = 0.0;
    std::uint64_t steps = 0;

    std::complex<double> c_hat() const {
        return {sum_cos / elapsed, sum_sin / elapsed};
    }
    double average(std::size_t i) const { return sum_real[i] / elapsed; }

    void merge(const ErgodicAccumulator& other);
};

struct FirstPassageRecord {
    double target = 0.0;
    double hit_time = 0.0;
    bool censored = false;
    std::uint64_t steps = 0; // steps actually simulated
};

class SimulationBlowup : public std::runtime_error {
  public:
    SimulationBlowup(double x, std::uint64_t step)
        : std::runtime_error("simulation blow-up: |X| = " + std::to_string(x) + " at step " +
                             std::to_string(step)) {}
};

ErgodicAccumulator simulate_accumulate(const ModelSpec& spec, const PathSimConfig& cfg,
                                       const std::vector<std::function<double(double)>>& tests,
                                       std::vector<double>* path_out = nullptr);

FirstPassageRecord first_passage(const ModelSpec& spec, const PathSimConfig& cfg, double target);

// Terminal state X(T) of one replicate.
double simulate_endpoint(const ModelSpec& spec, const PathSimConfig& cfg);

// Fraction of replicates with |X(T_eps)| / sqrt(T_eps) > delta, one entry per
// schedule eps. dt per eps follows the eps^2/20 rule.
struct TailPoint {
    double eps = 0.0;
    double T = 0.0;
    double fraction = 0.0;
};
std::vector<TailPoint> endpoint_tail_statistic(double alpha, double sigma, double x0,
                                               const ScheduleConfig& schedule, double delta,
                                               int n_replicates, std::uint64_t base_seed,
                                               int workers);

// Binary path dump: 8-byte magic "MSPATH01", u64 step count, then the states
// as little-endian doubles (initial state included, count+1 values).
void write_path_dump(std::ostream& os, const std::vector<double>& path);
std::vector<double> read_path_dump(std::istream& is);

// Deterministic worker pool: body(i) runs once for each i in [0, n).
void parallel_replicates(int n, int workers, const std::function<void(int)>& body);

} // namespace mshom

#endif
