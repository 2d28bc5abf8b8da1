#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace seqtag {

/// SplitMix64 generator. The recurrence is fixed so that a given seed yields
/// the same stream on every platform:
///
///   state += 0x9E3779B97F4A7C15
///   z = state
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept : seed_(seed), state_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() noexcept;

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() noexcept;

    /// Uniform in [lo, hi); requires lo < hi.
    double uniform(double lo, double hi);

    /// Uniform integer in [0, n); n > 0. Unbiased (rejection sampling).
    std::size_t uniform_index(std::size_t n);

    bool bernoulli(double p) noexcept { return uniform01() < p; }

    /// Independent stream derived from this generator's seed and a label.
    Rng fork(std::uint64_t label) const noexcept;

private:
    std::uint64_t seed_;
    std::uint64_t state_;
};

/// Fisher-Yates shuffle driven by Rng::uniform_index.
template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = rng.uniform_index(i);
        if (j != i - 1) std::swap(items[i - 1], items[j]);
    }
}

}  // namespace seqtag
