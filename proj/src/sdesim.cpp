#include "mshom/sdesim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <thread>

namespace mshom {

void PathSimConfig::validate(double eps) const {
    if (!(dt > 0.0) || !(T > 0.0)) throw std::invalid_argument("PathSimConfig: dt and T must be positive");
    const double rule = eps * eps / 20.0;
    if (dt > rule * (1.0 + 1e-12))
        throw std::invalid_argument("PathSimConfig: dt violates the eps^2/20 resolution rule");
    if (T / dt > 9.007199254740992e15 || n_steps() > (1ull << 40))
        throw std::invalid_argument("PathSimConfig: step count above 2^40");
}

std::uint64_t PathSimConfig::n_steps() const {
    return static_cast<std::uint64_t>(std::llround(std::ceil(T / dt - 1e-9)));
}

void ErgodicAccumulator::merge(const ErgodicAccumulator& other) {
    elapsed += other.elapsed;
    sum_cos += other.sum_cos;
    sum_sin += other.sum_sin;
    if (sum_real.size() != other.sum_real.size())
        throw std::invalid_argument("ErgodicAccumulator::merge: mismatched test lists");
    for (std::size_t i = 0; i < sum_real.size(); ++i) sum_real[i] += other.sum_real[i];
    last_state = other.last_state;
    steps += other.steps;
}

namespace {

struct Stepper {
    const ModelSpec& spec;
    CounterRng rng;
    double dt;
    double sqrt_dt;
    double blow_up;

    Stepper(const ModelSpec& s, const PathSimConfig& cfg)
        : spec(s), rng(cfg.seed, cfg.replicate_id), dt(cfg.dt), sqrt_dt(std::sqrt(cfg.dt)),
          blow_up(cfg.blow_up_limit) {}

    double advance(double x, std::uint64_t step) const {
        const double next =
            x + spec.drift(x) * dt + spec.diffusion(x) * sqrt_dt * rng.normal(step);
        if (!std::isfinite(next) || std::abs(next) > blow_up) throw SimulationBlowup(next, step);
        return next;
    }
};

} // namespace

ErgodicAccumulator simulate_accumulate(const ModelSpec& spec, const PathSimConfig& cfg,
                                       const std::vector<std::function<double(double)>>& tests,
                                       std::vector<double>* path_out) {
    cfg.validate(spec.eps);
    const std::uint64_t n = cfg.n_steps();
    Stepper st(spec, cfg);

    ErgodicAccumulator acc;
    acc.sum_real.assign(tests.size(), 0.0);
    double x = spec.x0;
    if (cfg.store_path && path_out) {
        path_out->clear();
        path_out->reserve(n + 1);
        path_out->push_back(x);
    }
    for (std::uint64_t k = 0; k < n; ++k) {
        acc.sum_cos += std::cos(x) * cfg.dt;
        acc.sum_sin += std::sin(x) * cfg.dt;
        for (std::size_t j = 0; j < tests.size(); ++j) acc.sum_real[j] += tests[j](x) * cfg.dt;
        acc.elapsed += cfg.dt;
        x = st.advance(x, k);
        if (cfg.store_path && path_out) path_out->push_back(x);
    }
    acc.last_state = x;
    acc.steps = n;
    return acc;
}

FirstPassageRecord first_passage(const ModelSpec& spec, const PathSimConfig& cfg, double target) {
    cfg.validate(spec.eps);
    FirstPassageRecord rec;
    rec.target = target;
    double x = spec.x0;
    if (x == target) return rec; // hit at time zero

    const std::uint64_t n = cfg.n_steps();
    Stepper st(spec, cfg);
    for (std::uint64_t k = 0; k < n; ++k) {
        const double next = st.advance(x, k);
        rec.steps = k + 1;
        if ((x - target) * (next - target) <= 0.0) {
            const double dx = next - x;
            const double frac = (dx != 0.0) ? (target - x) / dx : 1.0;
            rec.hit_time = (static_cast<double>(k) + frac) * cfg.dt;
            return rec;
        }
        x = next;
    }
    rec.censored = true;
    rec.hit_time = cfg.T;
    return rec;
}

double simulate_endpoint(const ModelSpec& spec, const PathSimConfig& cfg) {
    cfg.validate(spec.eps);
    const std::uint64_t n = cfg.n_steps();
    Stepper st(spec, cfg);
    double x = spec.x0;
    for (std::uint64_t k = 0; k < n; ++k) x = st.advance(x, k);
    return x;
}

std::vector<TailPoint> endpoint_tail_statistic(double alpha, double sigma, double x0,
                                               const ScheduleConfig& schedule, double delta,
                                               int n_replicates, std::uint64_t base_seed,
                                               int workers) {
    if (!(delta > 0.0)) throw std::invalid_argument("endpoint_tail_statistic: delta must be positive");
    if (!schedule.valid()) throw std::invalid_argument("endpoint_tail_statistic: invalid schedule");
    std::vector<TailPoint> out;
    out.reserve(schedule.eps_values.size());
    for (double eps : schedule.eps_values) {
        const ModelSpec spec = langevin_model(alpha, sigma, eps, x0);
        TailPoint pt;
        pt.eps = eps;
        pt.T = schedule.horizon(eps);
        std::vector<int> exceed(n_replicates, 0);
        const double sqrtT = std::sqrt(pt.T);
        parallel_replicates(n_replicates, workers, [&](int r) {
            PathSimConfig cfg;
            cfg.dt = eps * eps / 20.0;
            cfg.T = pt.T;
            cfg.seed = base_seed;
            cfg.replicate_id = static_cast<std::uint64_t>(r);
            const double xT = simulate_endpoint(spec, cfg);
            exceed[r] = (std::abs(xT) / sqrtT > delta) ? 1 : 0;
        });
        int count = 0;
        for (int e : exceed) count += e;
        pt.fraction = static_cast<double>(count) / static_cast<double>(n_replicates);
        out.push_back(pt);
    }
    return out;
}

void write_path_dump(std::ostream& os, const std::vector<double>& path) {
    static_assert(sizeof(double) == 8);
    const char magic[8] = {'M', 'S', 'P', 'A', 'T', 'H', '0', '1'};
    os.write(magic, 8);
    const std::uint64_t steps = path.empty() ? 0 : path.size() - 1;
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((steps >> (8 * i)) & 0xFF);
    os.write(buf, 8);
    for (double v : path) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
        os.write(buf, 8);
    }
}

std::vector<double> read_path_dump(std::istream& is) {
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, "MSPATH01", 8) != 0)
        throw std::runtime_error("read_path_dump: bad magic");
    char buf[8];
    is.read(buf, 8);
    std::uint64_t steps = 0;
    for (int i = 0; i < 8; ++i)
        steps |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
    std::vector<double> path(steps + 1);
    for (auto& v : path) {
        is.read(buf, 8);
        if (!is) throw std::runtime_error("read_path_dump: truncated payload");
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i)
            bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
        std::memcpy(&v, &bits, 8);
    }
    return path;
}

void parallel_replicates(int n, int workers, const std::function<void(int)>& body) {
    if (n <= 0) return;
    if (workers < 1) workers = 1;
    workers = std::min(workers, n);
    if (workers == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::atomic<bool> failed{false};
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n || failed.load()) return;
                try {
                    body(i);
                } catch (...) {
                    if (!failed.exchange(true)) err = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failed.load() && err) std::rethrow_exception(err);
}

} // namespace mshom
