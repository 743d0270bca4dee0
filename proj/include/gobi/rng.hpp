#ifndef GOBI_RNG_HPP
#define GOBI_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace gobi {

// SplitMix64 step. Used to derive independent seed streams from one master
// seed so that consumers (action selection, rollout sampling, layout
// generation) cannot perturb each other's sequences.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t s = master ^ (stream * 0xd1b54a32d192ed03ULL + 0x2545f4914f6cdd1dULL);
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    return a ^ (b << 1) ^ (b >> 63);
}

// Uniform integer in [0, n). Rejection sampling on the raw engine output;
// std::uniform_int_distribution is implementation-defined and would break
// the cross-platform determinism contract.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

// Uniform double in [0, 1) with 53 bits of precision.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Deterministic standard normal draws (Box-Muller over explicit 53-bit
// uniforms). std::normal_distribution is not bit-stable across standard
// library implementations.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1], u2 in [0, 1)
        const double u1 = static_cast<double>((rng_() >> 11) + 1) * 0x1.0p-53;
        const double u2 = uniform01(rng_);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.14159265358979323846 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::mt19937_64 rng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace gobi

#endif
