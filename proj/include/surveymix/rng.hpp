#ifndef SURVEYMIX_RNG_HPP
#define SURVEYMIX_RNG_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

// Deterministic random number generation. Every random draw in the library
// flows from a single user seed through the derivation scheme below, so runs
// are reproducible bit-for-bit across platforms with IEEE-754 doubles.
// The exact algorithms (SplitMix64 stream, Box-Muller normals, inverse-CDF
// categorical draws, Fisher-Yates shuffle) are part of the file-format
// contract and are documented in the README.

namespace smx {

// One SplitMix64 scramble step.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
}

// Purpose tags keep per-module streams disjoint.
namespace stream {
inline constexpr std::uint64_t kInit = 1;    // EM initialization, one stream per restart
inline constexpr std::uint64_t kSample = 2;  // synthetic data generation
inline constexpr std::uint64_t kShuffle = 3; // cross-validation fold shuffle
inline constexpr std::uint64_t kJitter = 4;  // scatter-plot jitter
} // namespace stream

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t purpose,
                                 std::uint64_t index = 0) {
    return mix64(mix64(mix64(seed) + purpose) + index);
}

// SplitMix64 generator with helpers for the draw shapes used in the library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform index in [0, n). n must be positive.
    std::size_t index(std::size_t n) {
        auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
        return i < n ? i : n - 1;
    }

    // Standard normal via Box-Muller; the second deviate of each pair is
    // cached and returned by the following call.
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = 1.0 - uniform(); // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * 3.14159265358979323846 * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

    // Draws an index with probability proportional to weights[i].
    std::size_t categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = uniform() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return i;
        }
        return weights.empty() ? 0 : weights.size() - 1;
    }

    // Fisher-Yates, descending index order.
    template <class T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::uint64_t state_;
    bool has_cached_ = false;
    double cached_ = 0.0;
};

} // namespace smx

#endif
