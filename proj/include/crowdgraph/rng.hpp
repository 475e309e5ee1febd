#pragma once

// Seeded random streams. Everything random in the library takes an explicit
// 64-bit seed; nothing reads global state. The engine is std::mt19937_64,
// whose output sequence is fixed by the standard. The standard distributions
// are implementation-defined, so the few we need are written out here to keep
// results bitwise-identical across toolchains.

#include <cstdint>
#include <random>
#include <vector>

namespace crowdgraph {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Child seed for stream `stream` of `base`:
///   derive_seed(base, k) = mix64(base ^ mix64(k + 1)).
/// Trial i of an experiment with master seed m runs on derive_seed(m, i).
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
    return mix64(base ^ mix64(stream + 1));
}

/// Fair +/-1 coin determined entirely by `seed`.
constexpr int coin_flip(std::uint64_t seed) noexcept {
    return (mix64(seed) >> 63) != 0 ? 1 : -1;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform01() < p; }

    int sign_with_probability(double p_plus) { return bernoulli(p_plus) ? 1 : -1; }

    /// Uniform integer in [0, n). Rejection sampling, no modulo bias. n > 0.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// k distinct indices from [0, n), uniformly, in draw order (partial Fisher-Yates).
    std::vector<std::uint32_t> sample_without_replacement(std::uint32_t n, std::uint32_t k) {
        std::vector<std::uint32_t> pool(n);
        for (std::uint32_t i = 0; i < n; ++i) pool[i] = i;
        for (std::uint32_t i = 0; i < k; ++i) {
            const auto j = i + static_cast<std::uint32_t>(below(n - i));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(k);
        return pool;
    }

    /// Same as above but drawing from an explicit population.
    template <class T>
    std::vector<T> sample_from(std::vector<T> population, std::size_t k) {
        for (std::size_t i = 0; i < k; ++i) {
            const auto j = i + static_cast<std::size_t>(below(population.size() - i));
            std::swap(population[i], population[j]);
        }
        population.resize(k);
        return population;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace crowdgraph
