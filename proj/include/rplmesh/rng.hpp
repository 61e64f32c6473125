/*
 * Deterministic random number generation (xoshiro256** seeded via splitmix64).
 *
 * std::<random> distributions are not bit-stable across standard libraries,
 * so every draw the simulator makes goes through this class. Streams are
 * split from a master seed so per-node randomness is independent of event
 * interleaving.
 */
#pragma once

#include <cmath>
#include <cstdint>

namespace rplmesh {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64_next(sm);
    }

    // Independent stream derived from (master_seed, stream_id).
    static Rng stream(std::uint64_t master_seed, std::uint64_t stream_id) {
        std::uint64_t sm = master_seed;
        std::uint64_t mixed = splitmix64_next(sm) ^ (0x9e3779b97f4a7c15ULL * (stream_id + 1));
        return Rng(mixed);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform double in [0, 1), 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, bound); bound must be > 0. Unbiased (rejection).
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return uniform() < p;
    }

    bool coin() { return (next_u64() & 1u) != 0; }

    // Marsaglia polar method; the spare variate is discarded to keep the
    // generator stateless between calls.
    double normal(double mean, double sigma) {
        for (;;) {
            const double u = 2.0 * uniform() - 1.0;
            const double v = 2.0 * uniform() - 1.0;
            const double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) {
                return mean + sigma * u * std::sqrt(-2.0 * std::log(s) / s);
            }
        }
    }

  private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

}  // namespace rplmesh
