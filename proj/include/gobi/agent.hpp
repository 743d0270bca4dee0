#ifndef GOBI_AGENT_HPP
#define GOBI_AGENT_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "gobi/dynamics.hpp"
#include "gobi/gridworld.hpp"
#include "gobi/intrinsic.hpp"
#include "gobi/reachability.hpp"

namespace gobi {

struct QTable {
    std::unordered_map<std::uint64_t, std::array<double, kNumActions>> q;
    double alpha = 0.1;
    double gamma = 0.99;
    double epsilon = 0.05;

    double value(HashCode state, Action action) const {
        const auto it = q.find(state.value);
        return it == q.end() ? 0.0 : it->second[static_cast<int>(action)];
    }
    double max_value(HashCode state) const {
        const auto it = q.find(state.value);
        if (it == q.end()) return 0.0;
        double best = it->second[0];
        for (int a = 1; a < kNumActions; ++a) best = std::max(best, it->second[a]);
        return best;
    }
    // Ties break on the lowest action index.
    Action argmax(HashCode state) const {
        const auto it = q.find(state.value);
        if (it == q.end()) return static_cast<Action>(0);
        int best = 0;
        for (int a = 1; a < kNumActions; ++a)
            if (it->second[a] > it->second[best]) best = a;
        return static_cast<Action>(best);
    }
};

// Epsilon-greedy; uniform over the 7 actions with probability epsilon.
Action select_action(const QTable& qtable, HashCode obs_hash, std::mt19937_64& rng);

// One-step Q-learning update with zero bootstrap on terminal transitions.
void q_update(QTable& qtable, HashCode state, Action action, double r_total, HashCode next_state,
              bool done);

enum class DynamicsBackend : std::uint8_t { Oracle = 0, TabularPretrained = 1, TabularOnline = 2 };

const char* to_string(DynamicsBackend b);
DynamicsBackend parse_dynamics_backend(const std::string& name);

enum class LifelongKind : std::uint8_t { Count = 0, Re3 = 1 };

// Intrinsic-reward configuration: reward kind, decay, expansion parameters,
// and the forward-dynamics backend feeding the episodic buffer.
struct GobiConfig {
    RewardKind kind = RewardKind::GoBI;
    LifelongKind lifelong = LifelongKind::Count;
    double lambda0 = 0.01;
    double rho = 0.0;
    ExpansionConfig expansion{};
    DynamicsBackend backend = DynamicsBackend::Oracle;
    OutputMode output_mode = OutputMode::PanoOutput;  // tabular backends
    std::uint64_t pretrain_steps = 0;                 // TabularPretrained only
    int re3_embed_dim = 16;
    int re3_k_nn = 3;
    std::uint64_t projection_seed = 0;  // seeds the random encoder
};

struct EpsilonSchedule {
    double start = 1.0;
    double end = 0.05;
    double anneal_frac = 0.2;  // fraction of the episode budget
};

double epsilon_at(const EpsilonSchedule& schedule, std::uint64_t episode, std::uint64_t budget);

struct TrainConfig {
    EnvSpec env;
    std::uint64_t episodes = 100;
    std::uint64_t seed = 1;
    double alpha = 0.1;
    double gamma = 0.99;
    EpsilonSchedule eps{};
    std::optional<std::uint32_t> max_steps_override;
    // When set, every episode uses this layout seed instead of a fresh one.
    std::optional<std::uint64_t> fixed_layout_seed;
    // Absent -> extrinsic-only training (no expansion, no counting).
    std::optional<GobiConfig> intrinsic;
    bool record_steps = true;
};

struct StepRecord {
    HashCode obs_hash;  // hash of the post-action observation
    Action action = Action::Left;
    double r_ext = 0.0;
    double r_int = 0.0;
    double lambda = 0.0;
    int delta_m = 0;
    std::uint64_t buffer_size = 0;
    Vec2i position{};  // post-action agent position
    bool success = false;
};

struct EpisodeLog {
    std::uint64_t episode = 0;  // 1-based
    std::vector<StepRecord> steps;
    double ext_return = 0.0;
    bool success = false;
    std::uint32_t steps_used = 0;
    std::uint64_t env_steps_before = 0;  // cumulative, pre-training included
    std::uint64_t final_buffer_size = 0;
    double lambda = 0.0;
};

struct TrainResult {
    std::vector<EpisodeLog> episodes;
    QTable qtable;
    std::uint64_t pretrain_steps = 0;
    std::uint64_t total_env_steps = 0;  // pre-training + policy steps
};

// Throws std::invalid_argument for any inconsistent configuration; called
// by train() before any episode runs.
void validate(const TrainConfig& config);

// Layout seed used for a given 1-based episode; shared with replay paths.
std::uint64_t train_env_seed(const TrainConfig& config, std::uint64_t episode);

TrainResult train(const TrainConfig& config);

struct EvalResult {
    double success_rate = 0.0;
    double mean_return = 0.0;
};

// Greedy rollouts (epsilon = 0) on freshly generated episodes; never
// mutates the Q-table.
EvalResult evaluate(const QTable& qtable, const EnvSpec& env, std::uint64_t n_episodes,
                    std::uint64_t seed, std::optional<std::uint32_t> max_steps_override = {},
                    std::optional<std::uint64_t> fixed_layout_seed = {});

}  // namespace gobi

#endif
