#pragma once

// Deterministic random streams. The reproducibility contract (identical seed ->
// byte-identical output) must not depend on the standard library's unspecified
// distribution algorithms, so the generator and the variate transforms live here.
//
// Stream derivation: a master seed plus a 64-bit purpose tag are mixed through
// splitmix64 to fill a xoshiro256++ state. Tags are stable constants, so adding
// a consumer never perturbs the draws of existing ones.

#include <cstdint>

namespace kinex {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class RngStream {
  public:
    RngStream() : RngStream(0x853C49E6748FEA9BULL) {}

    explicit RngStream(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
        state_[0] |= 1;  // xoshiro must not start from the all-zero state
    }

    static RngStream derive(std::uint64_t master_seed, std::uint64_t tag) {
        std::uint64_t sm = master_seed ^ (0x9E3779B97F4A7C15ULL * (tag + 1));
        return RngStream(splitmix64(sm));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Symmetric uniform on (-h, h); the closed endpoints have probability ~2^-52
    // and are rejected so admissibility bounds hold almost surely in every draw.
    double symmetric_uniform(double halfwidth) {
        for (;;) {
            double u = 2.0 * uniform01() - 1.0;
            if (u > -1.0 && u < 1.0) return halfwidth * u;
        }
    }

    // Standard normal via the Marsaglia polar method (one spare cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = polar_factor(s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    static double polar_factor(double s);

    std::uint64_t state_[4];
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Stable stream tags (documented so seeds stay comparable across versions).
namespace stream_tag {
inline constexpr std::uint64_t kSimulation = 0;
inline constexpr std::uint64_t kInitialCondition = 1;
inline constexpr std::uint64_t kAnalysis = 2;
inline constexpr std::uint64_t kWorkerBase = 1000;  // worker k uses kWorkerBase + k
inline constexpr std::uint64_t kSweepBase = 2000;   // sweep point i uses kSweepBase + i
}  // namespace stream_tag

}  // namespace kinex
