#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace slstt {

/// Counter-free splitmix64 generator. Every distribution below is written
/// out explicitly so that streams are bit-identical across platforms and
/// standard library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    /// Derives an independent stream from (seed, path...) so that e.g. each
    /// sample, fold, or epoch gets its own reproducible generator.
    static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
        Rng r(seed);
        for (std::uint64_t p : path) {
            r.state_ = mix(r.state_ ^ (p + 0x9E3779B97F4A7C15ULL));
        }
        return r;
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix(state_);
    }

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    /// Standard normal via Box-Muller (cosine branch only, no cached spare).
    double normal() {
        double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Zero-mean normal with the given std, resampled until |x| <= cutoff_sigmas * std.
    double truncated_normal(double stddev, double cutoff_sigmas) {
        for (;;) {
            double x = normal();
            if (std::fabs(x) <= cutoff_sigmas) {
                return x * stddev;
            }
        }
    }

    /// Uniform integer in [0, n), n >= 1. Rejection sampling, no modulo bias.
    std::uint64_t uniform_index(std::uint64_t n) {
        if (n <= 1) {
            return 0;
        }
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        for (;;) {
            std::uint64_t v = next_u64();
            if (v < limit) {
                return v % n;
            }
        }
    }

    /// Fisher-Yates shuffle, descending index order.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_index(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t state_;
};

}  // namespace slstt
