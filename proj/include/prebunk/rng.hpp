#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include "prebunk/errors.hpp"

namespace prebunk {

// SplitMix64 finalizer. All randomness in the library flows through this mixer,
// so any (seed, counter) pair names one reproducible value on every platform.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// The i-th element of the SplitMix64 stream seeded with `master`. estimate_spread
// derives run i's seed as derive_seed(master_seed, i); serial and fanned-out
// execution therefore agree.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master + index * 0x9e3779b97f4a7c15ull);
}

// Stateless per-object coin: one draw per (seed, tag, id). Simulations use this
// for edge and deception coins, which makes a run's world a pure function of its
// seed regardless of traversal order.
constexpr std::uint64_t coin_bits(std::uint64_t seed, std::uint64_t tag, std::uint64_t id) {
    return splitmix64(seed ^ splitmix64(tag + id * 0x9e3779b97f4a7c15ull));
}

inline double to_unit_double(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Uniform [0,1) coin for object `id` under stream `tag` of run `seed`.
inline double coin_u01(std::uint64_t seed, std::uint64_t tag, std::uint64_t id) {
    return to_unit_double(coin_bits(seed, tag, id));
}

// Small sequential generator for sampling code (target shuffles, parameter synthesis).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    double next_u01() { return to_unit_double(next_u64()); }

    // Uniform integer in [0, bound) by rejection, bound > 0.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % bound;
    }

    // Standard normal via Marsaglia polar, one value per call.
    double next_standard_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * next_u01() - 1.0;
            v = 2.0 * next_u01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

    double next_normal(double mean, double stddev) { return mean + stddev * next_standard_normal(); }

    // N_[lo,hi](mean, variance) by rejection from the untruncated normal; exact,
    // no clipping. variance = 0 degenerates to the mean (which must lie in range).
    double next_truncated_normal(double mean, double variance, double lo, double hi) {
        if (variance < 0.0) throw ConfigError("truncated normal: negative variance");
        if (variance == 0.0) {
            if (mean < lo || mean > hi) throw ConfigError("truncated normal: degenerate mean outside range");
            return mean;
        }
        const double sd = std::sqrt(variance);
        for (;;) {
            const double x = next_normal(mean, sd);
            if (x >= lo && x <= hi) return x;
        }
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

namespace coin_tag {
// Stream tags keep edge and node coins of one run independent.
inline constexpr std::uint64_t edge = 0x45444745ull;
inline constexpr std::uint64_t node = 0x4e4f4445ull;
}  // namespace coin_tag

}  // namespace prebunk
