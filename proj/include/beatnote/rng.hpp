#ifndef BEATNOTE_RNG_HPP
#define BEATNOTE_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>

namespace beatnote {

// Portable, seedable generators used everywhere randomness is needed.
// Two rules keep datasets reproducible across implementations:
//   * streams are split with derive_seed(master, index) (SplitMix64 output
//     at position index+1 of the stream seeded with master), and
//   * all draws go through Xoshiro256** seeded from SplitMix64, with
//     uniforms taken from the top 53 bits and Gaussians via Box-Muller
//     (two uniforms per Gaussian, no caching).

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Stream-split rule: the seed for sub-stream `index` of `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t state = master + index * 0x9E3779B97F4A7C15ULL;
    return splitmix64(state);
}

class Xoshiro256ss {
public:
    explicit Xoshiro256ss(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    std::uint64_t next() {
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

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; consumes exactly two uniforms.
    double gaussian() {
        double u1 = uniform();
        const double u2 = uniform();
        while (u1 <= 0.0) u1 = 0x1.0p-53;  // guard log(0)
        const double r = std::sqrt(-2.0 * std::log(u1));
        return r * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
};

}  // namespace beatnote

#endif  // BEATNOTE_RNG_HPP
