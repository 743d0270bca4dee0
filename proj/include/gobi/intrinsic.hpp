#ifndef GOBI_INTRINSIC_HPP
#define GOBI_INTRINSIC_HPP

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "gobi/gridworld.hpp"
#include "gobi/hash.hpp"

namespace gobi {

// Lifelong visit counts, persistent across episodes within a training run.
// The count of a never-observed code is 0.
class LifelongCount {
public:
    // Increments the count for the code, then returns 1/sqrt(new count):
    // the current visit is included, so the first visit yields 1.
    double bonus(HashCode obs_hash);

    std::uint64_t count(HashCode obs_hash) const;
    std::size_t distinct() const { return counts_.size(); }

private:
    std::unordered_map<std::uint64_t, std::uint64_t> counts_;
};

double count_bonus(LifelongCount& counts, HashCode obs_hash);

// k-NN novelty over fixed random embeddings. The encoder is a seeded random
// linear map, immutable after construction; the bank grows by exactly one
// entry per environment step.
class Re3Memory {
public:
    Re3Memory(int input_dim, int embed_dim, int k_nn, std::uint64_t seed);

    // Encodes the input, returns log(||y - y_kNN||_2 + 1) against the
    // current bank (0 while the bank holds fewer than k_nn entries), then
    // appends the encoding.
    double bonus(std::span<const std::uint8_t> input);
    double bonus(const Observation& obs);

    std::vector<double> encode(std::span<const std::uint8_t> input) const;

    int k_nn() const { return k_nn_; }
    int embed_dim() const { return embed_dim_; }
    std::size_t bank_size() const { return bank_entries_; }

private:
    int input_dim_;
    int embed_dim_;
    int k_nn_;
    std::vector<double> weights_;  // embed_dim_ rows of length input_dim_
    std::vector<double> bank_;     // flattened, embed_dim_ stride
    std::size_t bank_entries_ = 0;
};

// lambda = lambda0 * (1 - rho)^((e - 1) * T), non-increasing in e and equal
// to lambda0 at e = 1.
struct DecaySchedule {
    double lambda0 = 0.01;
    double rho = 0.0;
    std::uint32_t episode_len = 1;  // T
};

double decayed_lambda(const DecaySchedule& schedule, std::uint64_t episode_index);

enum class RewardKind : std::uint8_t {
    GoBI = 0,            // delta_m * lifelong
    R1_EpisodicOnly = 1, // delta_m
    R2_Indicator = 2,    // 1{delta_m > 0} * lifelong
    R3_LifelongOnly = 3, // lifelong
};

const char* to_string(RewardKind kind);
RewardKind parse_reward_kind(const std::string& name);  // throws std::invalid_argument

double gobi_reward(int delta_m, double lifelong);

// Reward for any kind given the episodic delta and the lifelong term.
double combine_reward(RewardKind kind, int delta_m, double lifelong);

// Count-based form: reads the (already updated) count of obs_hash for the
// lifelong term. Callers must have applied count_bonus for this step first.
double ablation_reward(RewardKind kind, int delta_m, HashCode obs_hash,
                       const LifelongCount& counts);

}  // namespace gobi

#endif
