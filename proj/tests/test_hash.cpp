#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "gobi/gridworld.hpp"
#include "gobi/hash.hpp"
#include "gobi/rng.hpp"
#include "oracles.hpp"

using namespace gobi;

namespace {

std::vector<double> random_unit_vector(std::mt19937_64& rng, int dim) {
    NormalSampler gauss(rng());
    std::vector<double> v(dim);
    double norm = 0.0;
    for (double& x : v) {
        x = gauss.next();
        norm += x * x;
    }
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
}

}  // namespace

TEST_CASE("exact_hash matches frozen golden values") {
    CHECK(exact_hash({}).value == 14695981039346656037ULL);

    std::vector<std::uint8_t> ramp(10);
    for (int i = 0; i < 10; ++i) ramp[i] = static_cast<std::uint8_t>(i);
    CHECK(exact_hash(ramp).value == 10952987118811563378ULL);

    const std::uint8_t abc[3] = {'a', 'b', 'c'};
    CHECK(exact_hash(abc).value == 16654208175385433931ULL);
}

TEST_CASE("exact_hash agrees with an independent reference implementation") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::uint8_t> bytes(uniform_below(rng, 64));
        for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
        CHECK(exact_hash(bytes).value == test::fnv1a_reference(bytes));
    }
}

TEST_CASE("identical observations hash identically; mutations change the code") {
    std::mt19937_64 rng(11);
    Observation obs;
    for (auto& v : obs.values) v = static_cast<std::uint8_t>(uniform_below(rng, 9));
    CHECK(hash_of(obs) == hash_of(obs));

    int collisions = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        Observation mutated = obs;
        const std::size_t idx = uniform_below(rng, mutated.values.size());
        mutated.values[idx] = static_cast<std::uint8_t>(mutated.values[idx] + 1 +
                                                        uniform_below(rng, 250));
        if (hash_of(mutated) == hash_of(obs)) ++collisions;
    }
    CHECK(collisions == 0);
}

TEST_CASE("simhash sign conventions") {
    SimHasher hasher(8, 50, 123);

    SUBCASE("zero vector maps to the all-ones code") {
        const std::vector<double> zero(8, 0.0);
        const BitCode code = hasher.hash(zero);
        CHECK(code.width == 50);
        CHECK(code.bits == (std::uint64_t{1} << 50) - 1);
    }

    SUBCASE("positive scaling never changes the code") {
        std::mt19937_64 rng(3);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> v(8), scaled(8);
            const double c = uniform01(rng) * 9.9 + 0.1;
            for (int i = 0; i < 8; ++i) {
                v[i] = uniform01(rng) * 2.0 - 1.0;
                scaled[i] = c * v[i];
            }
            CHECK(hasher.hash(v) == hasher.hash(scaled));
        }
    }

    SUBCASE("negation flips every bit when no projection is exactly zero") {
        std::mt19937_64 rng(4);
        std::vector<double> v(8), neg(8);
        for (int i = 0; i < 8; ++i) {
            v[i] = uniform01(rng) + 0.01;
            neg[i] = -v[i];
        }
        const BitCode a = hasher.hash(v);
        const BitCode b = hasher.hash(neg);
        CHECK(a.hamming(b) == 50);
    }

    SUBCASE("dimension mismatch is rejected") {
        const std::vector<double> wrong(9, 1.0);
        CHECK_THROWS_AS(hasher.hash(wrong), std::invalid_argument);
    }
}

TEST_CASE("simhash locality: differing-bit fraction tracks angle/pi") {
    const int dim = 24;
    SimHasher hasher(dim, 50, 321);
    std::mt19937_64 rng(2024);

    double mean_deviation = 0.0;
    const int pairs = 1000;
    for (int trial = 0; trial < pairs; ++trial) {
        const std::vector<double> u = random_unit_vector(rng, dim);
        std::vector<double> w = random_unit_vector(rng, dim);
        // orthonormalize w against u, then place it at the chosen angle
        double dot = 0.0;
        for (int i = 0; i < dim; ++i) dot += u[i] * w[i];
        double norm = 0.0;
        for (int i = 0; i < dim; ++i) {
            w[i] -= dot * u[i];
            norm += w[i] * w[i];
        }
        norm = std::sqrt(norm);
        const double theta = (0.05 + 0.9 * uniform01(rng)) * 3.14159265358979323846;
        std::vector<double> v(dim);
        for (int i = 0; i < dim; ++i)
            v[i] = std::cos(theta) * u[i] + std::sin(theta) * (w[i] / norm);

        const double frac = hasher.hash(u).fraction_differing(hasher.hash(v));
        mean_deviation += frac - theta / 3.14159265358979323846;
    }
    mean_deviation /= pairs;
    CHECK(std::abs(mean_deviation) < 0.03);
}
