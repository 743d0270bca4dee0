#ifndef GOBI_HASH_HPP
#define GOBI_HASH_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace gobi {

// Stable 64-bit code of a canonically serialized value. Equal inputs give
// equal codes across runs, platforms, and processes.
struct HashCode {
    std::uint64_t value = 0;

    friend bool operator==(HashCode a, HashCode b) { return a.value == b.value; }
    friend bool operator!=(HashCode a, HashCode b) { return a.value != b.value; }
    friend bool operator<(HashCode a, HashCode b) { return a.value < b.value; }
};

// FNV-1a over the canonical little-endian byte serialization of the input.
HashCode exact_hash(std::span<const std::uint8_t> bytes);

// Sign-bit code produced by SimHasher. Width is at most 64 bits (the
// default is 50).
struct BitCode {
    std::uint64_t bits = 0;
    int width = 0;

    friend bool operator==(const BitCode& a, const BitCode& b) {
        return a.bits == b.bits && a.width == b.width;
    }
    int hamming(const BitCode& other) const;
    double fraction_differing(const BitCode& other) const;
};

// Random-projection sign hashing for real-valued vectors. Projections are
// drawn once from a seeded standard normal generator and fixed afterwards;
// hashing is a pure function. Bit i is 1 iff dot(projection[i], v) >= 0,
// so the zero vector maps to the all-ones code.
class SimHasher {
public:
    SimHasher(int dim, int bits, std::uint64_t seed);

    BitCode hash(std::span<const double> v) const;

    int dim() const { return dim_; }
    int bits() const { return bits_; }

private:
    int dim_;
    int bits_;
    std::vector<double> projections_;  // bits_ rows of length dim_
};

}  // namespace gobi

template <>
struct std::hash<gobi::HashCode> {
    std::size_t operator()(gobi::HashCode h) const noexcept {
        return static_cast<std::size_t>(h.value);
    }
};

#endif
