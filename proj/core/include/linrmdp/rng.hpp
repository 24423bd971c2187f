#pragma once

#include <cstdint>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace linrmdp {

// Deterministic, platform-independent random number generation.
//
// Stream derivation is counter-based: every consumer of randomness owns a
// seed derived as
//
//     derive_seed(master, key, tag) = mix64(mix64(mix64(master) ^ key) ^ tag)
//
// where mix64 is the SplitMix64 finalizer. Identical (master, key, tag)
// triples always yield identical streams, on every platform. The generator
// behind a seed is xoshiro256**, state-initialized by four SplitMix64 draws.

/// SplitMix64 finalizer (one full step, including the golden-gamma increment).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Derives an independent stream seed from a master seed, a 64-bit key
/// identifying the consumer (cell, trajectory, table slot, ...) and a purpose
/// tag separating uses that share the same key.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t key,
                                    std::uint64_t tag) noexcept {
    return mix64(mix64(mix64(master) ^ key) ^ tag);
}

/// Purpose tags for derive_seed. Values are part of the reproducibility
/// contract; do not renumber.
namespace seed_tag {
inline constexpr std::uint64_t instance = 1;
inline constexpr std::uint64_t data_gen = 2;
inline constexpr std::uint64_t subsample_main = 3;
inline constexpr std::uint64_t subsample_var = 4;
inline constexpr std::uint64_t experiment_cell = 5;
} // namespace seed_tag

/// xoshiro256** with SplitMix64 seeding. Not cryptographic.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept {
        std::uint64_t sm = seed;
        for (auto& word : state_) {
            word = mix64(sm);
            sm = word;
        }
    }

    std::uint64_t next() noexcept {
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

    /// Uniform double in [0, 1), 53 mantissa bits.
    double u01() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n), unbiased via rejection.
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::next_below: n must be positive");
        const std::uint64_t threshold = (0 - n) % n; // 2^64 mod n
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    /// Samples an index from an (unnormalized is not allowed) probability
    /// vector by inverse-CDF walk; the last positive entry absorbs rounding.
    int categorical(std::span<const double> probs) {
        const double u = u01();
        double cum = 0.0;
        int last_positive = -1;
        for (int i = 0; i < static_cast<int>(probs.size()); ++i) {
            if (probs[i] <= 0.0) continue;
            cum += probs[i];
            last_positive = i;
            if (u < cum) return i;
        }
        if (last_positive < 0)
            throw std::invalid_argument("Rng::categorical: no positive mass");
        return last_positive;
    }

    /// Standard exponential variate.
    double exponential() noexcept { return -std::log1p(-u01()); }

    /// Fills `out` with a uniform draw from the simplex (normalized
    /// exponentials, i.e. a flat Dirichlet).
    void simplex(std::span<double> out) {
        double total = 0.0;
        for (auto& x : out) {
            x = exponential();
            total += x;
        }
        for (auto& x : out) x /= total;
    }

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

} // namespace linrmdp
