#include "gobi/agent.hpp"

#include <stdexcept>

#include "gobi/rng.hpp"

namespace gobi {

Action select_action(const QTable& qtable, HashCode obs_hash, std::mt19937_64& rng) {
    if (uniform01(rng) < qtable.epsilon)
        return static_cast<Action>(uniform_below(rng, kNumActions));
    return qtable.argmax(obs_hash);
}

void q_update(QTable& qtable, HashCode state, Action action, double r_total, HashCode next_state,
              bool done) {
    const double bootstrap = done ? 0.0 : qtable.gamma * qtable.max_value(next_state);
    const double target = r_total + bootstrap;
    double& q = qtable.q[state.value][static_cast<int>(action)];
    q += qtable.alpha * (target - q);
}

const char* to_string(DynamicsBackend b) {
    switch (b) {
        case DynamicsBackend::Oracle: return "oracle";
        case DynamicsBackend::TabularPretrained: return "tabular-pretrained";
        case DynamicsBackend::TabularOnline: return "tabular-online";
    }
    return "?";
}

DynamicsBackend parse_dynamics_backend(const std::string& name) {
    if (name == "oracle") return DynamicsBackend::Oracle;
    if (name == "tabular-pretrained") return DynamicsBackend::TabularPretrained;
    if (name == "tabular-online") return DynamicsBackend::TabularOnline;
    throw std::invalid_argument("unknown dynamics backend: " + name);
}

double epsilon_at(const EpsilonSchedule& schedule, std::uint64_t episode, std::uint64_t budget) {
    const double span = std::max(1.0, schedule.anneal_frac * static_cast<double>(budget));
    const double t = std::min(1.0, static_cast<double>(episode - 1) / span);
    return schedule.start + (schedule.end - schedule.start) * t;
}

void validate(const TrainConfig& config) {
    if (config.episodes < 1) throw std::invalid_argument("train: episodes must be >= 1");
    if (config.alpha <= 0.0 || config.alpha > 1.0)
        throw std::invalid_argument("train: alpha must be in (0, 1]");
    if (config.gamma < 0.0 || config.gamma >= 1.0)
        throw std::invalid_argument("train: gamma must be in [0, 1)");
    if (config.eps.start < 0.0 || config.eps.start > 1.0 || config.eps.end < 0.0 ||
        config.eps.end > 1.0)
        throw std::invalid_argument("train: epsilon bounds must be in [0, 1]");
    if (config.eps.anneal_frac < 0.0 || config.eps.anneal_frac > 1.0)
        throw std::invalid_argument("train: epsilon anneal fraction must be in [0, 1]");
    if (config.max_steps_override && *config.max_steps_override < 1)
        throw std::invalid_argument("train: max_steps override must be >= 1");
    if (!config.intrinsic) return;

    const GobiConfig& g = *config.intrinsic;
    if (g.lambda0 < 0.0) throw std::invalid_argument("train: lambda0 must be >= 0");
    if (g.rho < 0.0 || g.rho >= 1.0) throw std::invalid_argument("train: rho must be in [0, 1)");
    if (g.expansion.k < 1) throw std::invalid_argument("train: expansion k must be >= 1");
    if (g.expansion.n < 1) throw std::invalid_argument("train: expansion n must be >= 1");
    if (g.expansion.action_mode == ActionMode::EnumerateAll && g.expansion.k != 1)
        throw std::invalid_argument("train: EnumerateAll requires k = 1");
    if (g.backend == DynamicsBackend::TabularPretrained && g.pretrain_steps < 1)
        throw std::invalid_argument("train: tabular-pretrained needs pretrain_steps >= 1");
    if (g.backend != DynamicsBackend::Oracle && g.output_mode == OutputMode::ObsOutput &&
        g.expansion.k > 1)
        throw std::invalid_argument("train: obs-output tabular dynamics cannot chain; k must be 1");
    if (g.lifelong == LifelongKind::Re3 && (g.re3_embed_dim < 1 || g.re3_k_nn < 1))
        throw std::invalid_argument("train: re3 parameters must be >= 1");
}

std::uint64_t train_env_seed(const TrainConfig& config, std::uint64_t episode) {
    if (config.fixed_layout_seed) return *config.fixed_layout_seed;
    return mix_seed(mix_seed(config.seed, 3), episode);
}

TrainResult train(const TrainConfig& config) {
    validate(config);

    std::mt19937_64 action_rng(mix_seed(config.seed, 1));
    std::mt19937_64 expand_rng(mix_seed(config.seed, 2));

    const auto generate = [&](std::uint64_t layout_seed) {
        GridEnv env = config.env.make(layout_seed);
        if (config.max_steps_override) env.max_steps = *config.max_steps_override;
        return env;
    };

    const bool intrinsic_on = config.intrinsic.has_value();
    const GobiConfig gobi = config.intrinsic.value_or(GobiConfig{});
    const bool wants_expansion = intrinsic_on && gobi.kind != RewardKind::R3_LifelongOnly;
    const bool tabular_backend = wants_expansion && gobi.backend != DynamicsBackend::Oracle;

    TrainResult result;
    OracleGridDynamics oracle;
    TabularDynamics tabular(gobi.output_mode);
    const ForwardModel* model = nullptr;
    if (wants_expansion) {
        if (gobi.backend == DynamicsBackend::TabularPretrained) {
            const TransitionDataset ds = collect_random_transitions(
                generate, gobi.pretrain_steps, mix_seed(config.seed, 5));
            tabular.add(ds.records);
            result.pretrain_steps = gobi.pretrain_steps;
        }
        model = tabular_backend ? static_cast<const ForwardModel*>(&tabular)
                                : static_cast<const ForwardModel*>(&oracle);
    }

    QTable qtable;
    qtable.alpha = config.alpha;
    qtable.gamma = config.gamma;
    LifelongCount counts;
    std::optional<Re3Memory> re3;
    if (intrinsic_on && gobi.lifelong == LifelongKind::Re3)
        re3.emplace(Observation::kBytes, gobi.re3_embed_dim, gobi.re3_k_nn,
                    mix_seed(gobi.projection_seed, 4));

    EpisodicBuffer buffer;
    std::vector<TransitionRecord> episode_records;  // online backend only
    std::uint64_t total_steps = result.pretrain_steps;

    result.episodes.reserve(config.episodes);
    for (std::uint64_t e = 1; e <= config.episodes; ++e) {
        GridEnv env = generate(train_env_seed(config, e));
        buffer.reset();
        episode_records.clear();

        double lambda = 0.0;
        if (intrinsic_on && gobi.lambda0 > 0.0)
            lambda = decayed_lambda({gobi.lambda0, gobi.rho, env.max_steps}, e);
        qtable.epsilon = epsilon_at(config.eps, e, config.episodes);

        EpisodeLog log;
        log.episode = e;
        log.env_steps_before = total_steps;
        log.lambda = lambda;

        HashCode obs_hash = hash_of(observe(env));
        Panorama cur_pano;
        if (tabular_backend) cur_pano = panorama(env);

        while (!env.episode_done) {
            std::optional<ModelState> context;
            if (wants_expansion)
                context = tabular_backend ? ModelState{hash_of(cur_pano)}
                                          : ModelState{snapshot(env)};

            const Action action = select_action(qtable, obs_hash, action_rng);
            const StepResult sr = step(env, action);
            const HashCode next_hash = hash_of(sr.obs);

            int delta_m = 0;
            if (wants_expansion)
                delta_m = expand(buffer, obs_hash, *context, *model, gobi.expansion, expand_rng);

            double r_int = 0.0;
            if (intrinsic_on) {
                const double lifelong =
                    re3 ? re3->bonus(sr.obs) : counts.bonus(next_hash);
                r_int = combine_reward(gobi.kind, delta_m, lifelong);
            }

            q_update(qtable, obs_hash, action, sr.r_ext + lambda * r_int, next_hash, sr.done);
            ++total_steps;
            log.ext_return += sr.r_ext;
            log.success = log.success || sr.success;

            if (config.record_steps)
                log.steps.push_back({next_hash, action, sr.r_ext, r_int, lambda, delta_m,
                                     buffer.size(), env.agent_pos, sr.success});

            if (tabular_backend) {
                Panorama next_pano = panorama(env);
                if (gobi.backend == DynamicsBackend::TabularOnline)
                    episode_records.push_back({hash_of(cur_pano), action, sr.obs, next_pano});
                cur_pano = std::move(next_pano);
            }
            obs_hash = next_hash;
        }

        if (gobi.backend == DynamicsBackend::TabularOnline && wants_expansion)
            tabular.add(episode_records);

        log.steps_used = env.step_count;
        log.final_buffer_size = buffer.size();
        result.episodes.push_back(std::move(log));
    }

    result.qtable = std::move(qtable);
    result.total_env_steps = total_steps;
    return result;
}

EvalResult evaluate(const QTable& qtable, const EnvSpec& env_spec, std::uint64_t n_episodes,
                    std::uint64_t seed, std::optional<std::uint32_t> max_steps_override,
                    std::optional<std::uint64_t> fixed_layout_seed) {
    if (n_episodes < 1) throw std::invalid_argument("evaluate: n_episodes must be >= 1");
    EvalResult out;
    for (std::uint64_t e = 1; e <= n_episodes; ++e) {
        const std::uint64_t layout =
            fixed_layout_seed ? *fixed_layout_seed : mix_seed(mix_seed(seed, 7), e);
        GridEnv env = env_spec.make(layout);
        if (max_steps_override) env.max_steps = *max_steps_override;
        HashCode obs_hash = hash_of(observe(env));
        double ep_return = 0.0;
        bool success = false;
        while (!env.episode_done) {
            const StepResult sr = step(env, qtable.argmax(obs_hash));
            ep_return += sr.r_ext;
            success = success || sr.success;
            obs_hash = hash_of(sr.obs);
        }
        out.mean_return += ep_return;
        out.success_rate += success ? 1.0 : 0.0;
    }
    out.mean_return /= static_cast<double>(n_episodes);
    out.success_rate /= static_cast<double>(n_episodes);
    return out;
}

}  // namespace gobi
