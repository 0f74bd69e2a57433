#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "hmimvc/common.hpp"

namespace hmimvc {

/// splitmix64 step; used to hash seed components into independent streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives a child seed from a master seed and up to three counters.
/// Every randomized stage of the pipeline draws from its own derived
/// stream so that adding or removing one consumer cannot shift another.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t s = splitmix64(master ^ 0x6a09e667f3bcc909ULL);
    s = splitmix64(s ^ tag);
    s = splitmix64(s ^ a);
    s = splitmix64(s ^ b);
    return s;
}

// Stream tags. Arbitrary distinct constants.
namespace seed_tag {
inline constexpr std::uint64_t init_params = 1;
inline constexpr std::uint64_t corruption = 2;
inline constexpr std::uint64_t epoch_shuffle = 3;
inline constexpr std::uint64_t pair_sampling = 4;
inline constexpr std::uint64_t tau_pairs = 5;
inline constexpr std::uint64_t kmeans = 6;
inline constexpr std::uint64_t synth = 7;
}  // namespace seed_tag

/// Deterministic RNG with self-contained distributions. std::mt19937_64
/// supplies raw bits; the distribution logic is implemented here because
/// the standard library's distributions are implementation-defined and
/// would break bit-reproducibility across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Rejection sampling keeps it exactly uniform.
    index_t uniform_index(index_t n) {
        if (n == 0) throw std::invalid_argument("uniform_index: n must be > 0");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r;
        do {
            r = next_u64();
        } while (r >= limit);
        return static_cast<index_t>(r % n);
    }

    /// Standard normal via Box-Muller with a cached spare.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (index_t i = v.size() - 1; i > 0; --i) {
            const index_t j = uniform_index(i + 1);
            std::swap(v[i], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace hmimvc
