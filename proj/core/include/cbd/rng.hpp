#pragma once

#include <cstdint>

namespace cbd {

/// SplitMix64 finalizer. Used both to seed Xorshift64Star and to derive
/// independent sub-streams from a user seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Combine a base seed with a stream tag so that e.g. weight init, embedding
/// init, shuffling and dropout masks never share a sequence.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

/// xorshift64* (Vigna 2014). The state is seeded as splitmix64(seed); a zero
/// state is replaced by a fixed odd constant. Output is portable: the same
/// seed yields the same sequence on every platform.
class Xorshift64Star {
public:
    using result_type = std::uint64_t;

    explicit constexpr Xorshift64Star(std::uint64_t seed) noexcept : state_(splitmix64(seed)) {
        if (state_ == 0) state_ = 0x2545F4914F6CDD1DULL;
    }

    constexpr std::uint64_t next() noexcept {
        state_ ^= state_ >> 12;
        state_ ^= state_ << 25;
        state_ ^= state_ >> 27;
        return state_ * 0x2545F4914F6CDD1DULL;
    }

    constexpr result_type operator()() noexcept { return next(); }
    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    /// Uniform double in [0, 1) with 53 bits of precision.
    constexpr double uniform() noexcept {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    constexpr double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be > 0. Uses rejection to avoid bias.
    constexpr std::uint64_t below(std::uint64_t n) noexcept {
        const std::uint64_t limit = max() - max() % n;
        std::uint64_t r = next();
        while (r >= limit) r = next();
        return r % n;
    }

    constexpr std::uint64_t state() const noexcept { return state_; }

private:
    std::uint64_t state_;
};

/// Fisher-Yates shuffle driven by Xorshift64Star::below, so results do not
/// depend on the standard library's std::shuffle implementation.
template <typename RandomIt>
void portable_shuffle(RandomIt first, RandomIt last, Xorshift64Star& rng) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
        const std::uint64_t j = rng.below(i);
        using std::swap;
        swap(first[i - 1], first[j]);
    }
}

}  // namespace cbd
