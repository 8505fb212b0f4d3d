#ifndef BEAMSNR_RNG_HPP
#define BEAMSNR_RNG_HPP

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <utility>

namespace beamsnr {

// xoshiro256++ seeded through splitmix64. Self-contained so that sweep
// results are identical across platforms, standard libraries and thread
// counts; per-trial streams are derived from (master seed, counters).
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t x = seed;
        for (auto& w : state_) w = splitmix64(x);
    }

    // Counter-based stream derivation: mixes (a, b) into the master seed
    // with one splitmix64 step per word. Streams for distinct (a, b) are
    // independent for Monte-Carlo purposes and independent of call order.
    static Rng derive(uint64_t master, uint64_t a, uint64_t b) {
        uint64_t x = master;
        uint64_t h = splitmix64(x);
        x = h ^ (a + 0x9e3779b97f4a7c15ULL);
        h = splitmix64(x);
        x = h ^ (b + 0x9e3779b97f4a7c15ULL);
        return Rng(splitmix64(x));
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform on [0, 1)
    double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // integer in [0, bound), bound >= 1
    uint32_t uniform_int(uint32_t bound) {
        return uint32_t((__uint128_t(next_u64()) * bound) >> 64);
    }

    // one Box-Muller pair of independent standard normals
    std::pair<double, double> gaussian_pair() {
        double u1 = uniform01();
        if (u1 < 0x1.0p-53) u1 = 0x1.0p-53;
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
    }

    // circular complex Gaussian with E|z|^2 = var
    std::complex<double> cgaussian(double var) {
        auto [a, b] = gaussian_pair();
        const double s = std::sqrt(var / 2.0);
        return {s * a, s * b};
    }

private:
    static uint64_t splitmix64(uint64_t& x) {
        uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<uint64_t, 4> state_;
};

} // namespace beamsnr

#endif
