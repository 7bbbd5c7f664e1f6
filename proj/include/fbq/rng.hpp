#pragma once

#include <cmath>
#include <cstdint>

namespace fbq {

namespace detail {

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace detail

// Counter-based generator: the value at position n is a pure function of
// (seed, n), so any evaluation order -- including parallel -- yields the same
// stream. next_*() walk an internal cursor for sequential use.
class DeterministicRng {
public:
    explicit DeterministicRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t bits_at(std::uint64_t n) const {
        return detail::mix64(seed_ + (n + 1) * 0x9E3779B97F4A7C15ull);
    }

    // uniform in [0, 1), 53-bit resolution
    double uniform_at(std::uint64_t n) const {
        return static_cast<double>(bits_at(n) >> 11) * 0x1.0p-53;
    }

    // standard normal, Box-Muller on the two 32-bit halves of one draw
    float normal_at(std::uint64_t n) const {
        const std::uint64_t w = bits_at(n);
        const double u1 = (static_cast<double>(w >> 32) + 1.0) * 0x1.0p-32; // (0, 1]
        const double u2 = static_cast<double>(w & 0xFFFFFFFFull) * 0x1.0p-32; // [0, 1)
        const double r = std::sqrt(-2.0 * std::log(u1));
        return static_cast<float>(r * std::cos(6.283185307179586 * u2));
    }

    std::uint64_t next_bits() { return bits_at(cursor_++); }
    double next_uniform() { return uniform_at(cursor_++); }
    float next_normal() { return normal_at(cursor_++); }

private:
    std::uint64_t seed_;
    std::uint64_t cursor_ = 0;
};

// Stable seed derivation for independent sub-streams (per layer, step, tag...).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
    return DeterministicRng(DeterministicRng(base).bits_at(a)).bits_at(b);
}

} // namespace fbq
