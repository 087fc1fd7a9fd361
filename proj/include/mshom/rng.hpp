#ifndef MSHOM_RNG_HPP
#define MSHOM_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace mshom {

// Philox4x32-10 counter-based generator (Salmon et al., SC 2011).
// A draw is a pure function of (seed, stream, counter), so replicates can
// run in parallel without shared state and reproduce bit-identically.
namespace philox {

inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
inline constexpr std::uint32_t kMult0 = 0xD2511F53u;
inline constexpr std::uint32_t kMult1 = 0xCD9E8D57u;

inline void round_once(std::array<std::uint32_t, 4>& ctr, std::array<std::uint32_t, 2>& key) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMult0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMult1) * ctr[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
}

inline std::array<std::uint32_t, 4> block(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32),
        static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    std::array<std::uint32_t, 2> key = {
        static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    for (int r = 0; r < 10; ++r) round_once(ctr, key);
    return ctr;
}

} // namespace philox

// One standard normal per (seed, stream, step) via Box-Muller on a Philox block.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    double normal(std::uint64_t step) const {
        const auto r = philox::block(seed_, stream_, step);
        const std::uint64_t a = (static_cast<std::uint64_t>(r[1]) << 32) | r[0];
        const std::uint64_t b = (static_cast<std::uint64_t>(r[3]) << 32) | r[2];
        // u1 in (0,1] so the log is finite; u2 in [0,1).
        const double u1 = static_cast<double>((a >> 11) + 1) * 0x1.0p-53;
        const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double uniform(std::uint64_t step) const {
        const auto r = philox::block(seed_, stream_, step);
        const std::uint64_t a = (static_cast<std::uint64_t>(r[1]) << 32) | r[0];
        return static_cast<double>(a >> 11) * 0x1.0p-53;
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
};

} // namespace mshom

#endif
