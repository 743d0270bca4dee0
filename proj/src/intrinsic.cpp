#include "gobi/intrinsic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gobi/rng.hpp"

namespace gobi {

double LifelongCount::bonus(HashCode obs_hash) {
    const std::uint64_t n = ++counts_[obs_hash.value];
    return 1.0 / std::sqrt(static_cast<double>(n));
}

std::uint64_t LifelongCount::count(HashCode obs_hash) const {
    const auto it = counts_.find(obs_hash.value);
    return it == counts_.end() ? 0 : it->second;
}

double count_bonus(LifelongCount& counts, HashCode obs_hash) { return counts.bonus(obs_hash); }

Re3Memory::Re3Memory(int input_dim, int embed_dim, int k_nn, std::uint64_t seed)
    : input_dim_(input_dim), embed_dim_(embed_dim), k_nn_(k_nn) {
    if (input_dim < 1) throw std::invalid_argument("Re3Memory: input_dim must be >= 1");
    if (embed_dim < 1) throw std::invalid_argument("Re3Memory: embed_dim must be >= 1");
    if (k_nn < 1) throw std::invalid_argument("Re3Memory: k_nn must be >= 1");
    NormalSampler gauss(mix_seed(seed, 0x4e33));
    weights_.resize(static_cast<std::size_t>(embed_dim_) * input_dim_);
    for (double& w : weights_) w = gauss.next();
}

std::vector<double> Re3Memory::encode(std::span<const std::uint8_t> input) const {
    if (static_cast<int>(input.size()) != input_dim_)
        throw std::invalid_argument("Re3Memory: input length does not match input_dim");
    std::vector<double> y(embed_dim_, 0.0);
    for (int j = 0; j < embed_dim_; ++j) {
        const double* row = weights_.data() + static_cast<std::size_t>(j) * input_dim_;
        double acc = 0.0;
        for (int i = 0; i < input_dim_; ++i) acc += row[i] * static_cast<double>(input[i]);
        y[j] = acc;
    }
    return y;
}

double Re3Memory::bonus(std::span<const std::uint8_t> input) {
    const std::vector<double> y = encode(input);
    double value = 0.0;
    if (bank_entries_ >= static_cast<std::size_t>(k_nn_)) {
        std::vector<double> dists(bank_entries_);
        for (std::size_t e = 0; e < bank_entries_; ++e) {
            const double* row = bank_.data() + e * embed_dim_;
            double sq = 0.0;
            for (int j = 0; j < embed_dim_; ++j) {
                const double d = y[j] - row[j];
                sq += d * d;
            }
            dists[e] = std::sqrt(sq);
        }
        std::nth_element(dists.begin(), dists.begin() + (k_nn_ - 1), dists.end());
        value = std::log1p(dists[k_nn_ - 1]);
    }
    bank_.insert(bank_.end(), y.begin(), y.end());
    ++bank_entries_;
    return value;
}

double Re3Memory::bonus(const Observation& obs) {
    return bonus(std::span<const std::uint8_t>(obs.values.data(), obs.values.size()));
}

double decayed_lambda(const DecaySchedule& schedule, std::uint64_t episode_index) {
    if (schedule.lambda0 <= 0.0) throw std::invalid_argument("decayed_lambda: lambda0 must be > 0");
    if (schedule.rho < 0.0 || schedule.rho >= 1.0)
        throw std::invalid_argument("decayed_lambda: rho must be in [0, 1)");
    if (episode_index < 1) throw std::invalid_argument("decayed_lambda: episode index starts at 1");
    const double exponent =
        static_cast<double>(episode_index - 1) * static_cast<double>(schedule.episode_len);
    return schedule.lambda0 * std::pow(1.0 - schedule.rho, exponent);
}

const char* to_string(RewardKind kind) {
    switch (kind) {
        case RewardKind::GoBI: return "gobi";
        case RewardKind::R1_EpisodicOnly: return "r1";
        case RewardKind::R2_Indicator: return "r2";
        case RewardKind::R3_LifelongOnly: return "r3";
    }
    return "?";
}

RewardKind parse_reward_kind(const std::string& name) {
    if (name == "gobi") return RewardKind::GoBI;
    if (name == "r1") return RewardKind::R1_EpisodicOnly;
    if (name == "r2") return RewardKind::R2_Indicator;
    if (name == "r3") return RewardKind::R3_LifelongOnly;
    throw std::invalid_argument("unknown reward kind: " + name);
}

double gobi_reward(int delta_m, double lifelong) {
    return static_cast<double>(delta_m) * lifelong;
}

double combine_reward(RewardKind kind, int delta_m, double lifelong) {
    switch (kind) {
        case RewardKind::GoBI: return gobi_reward(delta_m, lifelong);
        case RewardKind::R1_EpisodicOnly: return static_cast<double>(delta_m);
        case RewardKind::R2_Indicator: return delta_m > 0 ? lifelong : 0.0;
        case RewardKind::R3_LifelongOnly: return lifelong;
    }
    return 0.0;
}

double ablation_reward(RewardKind kind, int delta_m, HashCode obs_hash,
                       const LifelongCount& counts) {
    const std::uint64_t n = std::max<std::uint64_t>(1, counts.count(obs_hash));
    return combine_reward(kind, delta_m, 1.0 / std::sqrt(static_cast<double>(n)));
}

}  // namespace gobi
