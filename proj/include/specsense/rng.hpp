#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace specsense {

/// SplitMix64 step. Used to expand seeds and to mix stream labels.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Derives a child seed from a parent seed and up to three stream labels.
/// Counter-based: campaigns split per-trial / per-node streams with this,
/// so results do not depend on execution order.
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t a = 0,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t h = parent;
    for (std::uint64_t v : {a, b, c}) {
        h ^= v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
        std::uint64_t s = h;
        h = splitmix64(s);
    }
    return h;
}

/// Deterministic random stream (xoshiro256++ seeded via SplitMix64).
///
/// All distributions are implemented here rather than taken from
/// <random> so that output is identical across standard libraries;
/// experiment reproducibility is byte-level.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
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

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller; the paired deviate is cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform01();  // (0, 1]
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Rayleigh-distributed magnitude with the given scale (mode) parameter.
    double rayleigh(double scale) {
        return scale * std::sqrt(-2.0 * std::log(1.0 - uniform01()));
    }

    /// Fair coin mapped to {+1, -1}.
    int sign_chip() { return (next_u64() >> 63) ? +1 : -1; }

    /// Unbiased integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("RngStream::below: n must be positive");
        const std::uint64_t rem = (UINT64_MAX % n + 1) % n;  // 2^64 mod n
        std::uint64_t v = next_u64();
        while (rem != 0 && v > UINT64_MAX - rem) v = next_u64();
        return v % n;
    }

    /// `count` distinct integers drawn uniformly from [lo, hi], returned sorted.
    std::vector<int> sample_distinct(int count, int lo, int hi) {
        const int n = hi - lo + 1;
        if (count < 0 || count > n)
            throw std::invalid_argument("RngStream::sample_distinct: count out of range");
        std::vector<int> pool(n);
        for (int i = 0; i < n; ++i) pool[i] = lo + i;
        for (int i = 0; i < count; ++i) {
            const int j = i + static_cast<int>(below(static_cast<std::uint64_t>(n - i)));
            std::swap(pool[i], pool[j]);
        }
        std::vector<int> picked(pool.begin(), pool.begin() + count);
        std::sort(picked.begin(), picked.end());
        return picked;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace specsense
