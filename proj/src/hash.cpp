#include "gobi/hash.hpp"

#include <bit>
#include <stdexcept>

#include "gobi/rng.hpp"

namespace gobi {

HashCode exact_hash(std::span<const std::uint8_t> bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (std::uint8_t b : bytes) {
        h ^= b;
        h *= 1099511628211ULL;
    }
    return HashCode{h};
}

int BitCode::hamming(const BitCode& other) const {
    return std::popcount(bits ^ other.bits);
}

double BitCode::fraction_differing(const BitCode& other) const {
    return static_cast<double>(hamming(other)) / static_cast<double>(width);
}

SimHasher::SimHasher(int dim, int bits, std::uint64_t seed) : dim_(dim), bits_(bits) {
    if (dim < 1) throw std::invalid_argument("SimHasher: dim must be >= 1");
    if (bits < 1 || bits > 64) throw std::invalid_argument("SimHasher: bits must be in [1, 64]");
    NormalSampler gauss(mix_seed(seed, 0x51a8));
    projections_.resize(static_cast<std::size_t>(bits_) * dim_);
    for (double& x : projections_) x = gauss.next();
}

BitCode SimHasher::hash(std::span<const double> v) const {
    if (static_cast<int>(v.size()) != dim_)
        throw std::invalid_argument("SimHasher: input length does not match dim");
    BitCode code;
    code.width = bits_;
    for (int i = 0; i < bits_; ++i) {
        const double* row = projections_.data() + static_cast<std::size_t>(i) * dim_;
        double dot = 0.0;
        for (int j = 0; j < dim_; ++j) dot += row[j] * v[j];
        if (dot >= 0.0) code.bits |= (std::uint64_t{1} << i);
    }
    return code;
}

}  // namespace gobi
