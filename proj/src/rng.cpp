#include "seqtag/rng.hpp"

#include <cmath>

#include "seqtag/error.hpp"

namespace seqtag {

std::uint64_t Rng::next_u64() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double Rng::uniform01() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    if (!(lo < hi)) throw Error(ErrorCode::invalid_argument, "uniform: require lo < hi");
    double v = lo + (hi - lo) * uniform01();
    // rounding can land exactly on hi
    if (v >= hi) v = std::nextafter(hi, lo);
    return v;
}

std::size_t Rng::uniform_index(std::size_t n) {
    if (n == 0) throw Error(ErrorCode::invalid_argument, "uniform_index: n must be positive");
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        std::uint64_t r = next_u64();
        if (r >= threshold) return static_cast<std::size_t>(r % bound);
    }
}

Rng Rng::fork(std::uint64_t label) const noexcept {
    Rng mixer(seed_ ^ (label * 0xD1B54A32D192ED03ULL));
    return Rng(mixer.next_u64());
}

}  // namespace seqtag
