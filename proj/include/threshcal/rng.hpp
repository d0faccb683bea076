#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace threshcal {

/// SplitMix64 step. Used to expand seeds and to finalize hashes.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// xoshiro256** seeded through SplitMix64. The integer stream is identical on
/// every platform; doubles are built from the top 53 bits.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) noexcept {
        std::uint64_t sm = seed;
        for (auto& word : s_) {
            word = splitmix64(sm);
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~std::uint64_t{0}; }

    result_type operator()() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform in [0, 1).
    double uniform() noexcept {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound) by rejection, no modulo bias. bound > 0.
    std::uint64_t below(std::uint64_t bound) noexcept {
        const std::uint64_t limit = max() - max() % bound;
        std::uint64_t x;
        do {
            x = (*this)();
        } while (x >= limit);
        return x % bound;
    }

    /// Standard normal by the Box-Muller transform (one variate per call).
    double normal() noexcept {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> s_{};
};

/// FNV-1a over a sequence of fields, finalized with SplitMix64. Stable across
/// runs and platforms; used to derive per-cell and per-relation seeds.
class StableHash {
public:
    StableHash& add(std::uint64_t value) noexcept {
        for (int i = 0; i < 8; ++i) {
            byte(static_cast<unsigned char>(value >> (8 * i)));
        }
        return *this;
    }

    StableHash& add(std::string_view text) noexcept {
        add(static_cast<std::uint64_t>(text.size()));
        for (char c : text) {
            byte(static_cast<unsigned char>(c));
        }
        return *this;
    }

    std::uint64_t digest() const noexcept {
        std::uint64_t state = h_;
        return splitmix64(state);
    }

private:
    void byte(unsigned char b) noexcept {
        h_ ^= b;
        h_ *= 0x100000001B3ULL;
    }

    std::uint64_t h_ = 0xCBF29CE484222325ULL;
};

}  // namespace threshcal
