#include "gobi/reachability.hpp"

#include <deque>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gobi/rng.hpp"

namespace gobi {

int expand(EpisodicBuffer& buffer, HashCode current_obs_hash, const ModelState& context,
           const ForwardModel& model, const ExpansionConfig& config, std::mt19937_64& rng) {
    if (config.k < 1) throw std::invalid_argument("expand: k must be >= 1");
    if (config.n < 1) throw std::invalid_argument("expand: n must be >= 1");

    const std::size_t before = buffer.size();
    buffer.insert(current_obs_hash);

    const int actions = model.action_count();
    if (config.action_mode == ActionMode::EnumerateAll) {
        if (config.k != 1)
            throw std::invalid_argument("expand: EnumerateAll supports k=1 only; use SampleRandom");
        for (int a = 0; a < actions; ++a) {
            if (const auto pred = model.predict(context, a)) buffer.insert(pred->obs_hash);
        }
    } else {
        for (int rollout = 0; rollout < config.n; ++rollout) {
            ModelState state = context;
            for (int t = 0; t < config.k; ++t) {
                const int a = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(actions)));
                auto pred = model.predict(state, a);
                if (!pred) break;
                buffer.insert(pred->obs_hash);
                if (t + 1 == config.k) break;
                if (!pred->next) break;
                state = std::move(*pred->next);
            }
        }
    }
    return static_cast<int>(buffer.size() - before);
}

int expand_exhaustive(EpisodicBuffer& buffer, HashCode current_obs_hash, const ModelState& context,
                      const ForwardModel& model, int k) {
    if (k < 1) throw std::invalid_argument("expand_exhaustive: k must be >= 1");

    const std::size_t before = buffer.size();
    buffer.insert(current_obs_hash);

    struct Frame {
        ModelState state;
        int depth;
    };
    std::vector<Frame> stack;
    stack.push_back({context, 0});
    const int actions = model.action_count();
    while (!stack.empty()) {
        Frame frame = std::move(stack.back());
        stack.pop_back();
        for (int a = 0; a < actions; ++a) {
            auto pred = model.predict(frame.state, a);
            if (!pred) continue;
            buffer.insert(pred->obs_hash);
            if (frame.depth + 1 < k && pred->next)
                stack.push_back({std::move(*pred->next), frame.depth + 1});
        }
    }
    return static_cast<int>(buffer.size() - before);
}

namespace {

// Shared BFS shape: `expand_state(state, action)` yields (successor,
// observation hash, expandable); `identity` must distinguish states whose
// futures differ.
template <typename State, typename ExpandFn, typename IdentityFn>
std::unordered_set<std::uint64_t> bfs_impl(const State& start, int k, std::size_t max_states,
                                           std::uint64_t start_obs, int action_count,
                                           ExpandFn&& expand_state, IdentityFn&& identity,
                                           bool start_expandable) {
    if (k < 0) throw std::invalid_argument("bfs_reachable: k must be >= 0");

    std::unordered_set<std::uint64_t> reached{start_obs};
    std::unordered_set<std::uint64_t> seen{identity(start)};
    std::deque<std::pair<State, int>> queue;
    if (start_expandable) queue.emplace_back(start, 0);

    while (!queue.empty()) {
        auto [state, depth] = std::move(queue.front());
        queue.pop_front();
        if (depth == k) continue;
        for (int a = 0; a < action_count; ++a) {
            auto [next, obs, expandable] = expand_state(state, a);
            reached.insert(obs);
            if (seen.size() >= max_states)
                throw std::runtime_error("bfs_reachable: state cap exceeded");
            if (seen.insert(identity(next)).second && depth + 1 < k && expandable)
                queue.emplace_back(std::move(next), depth + 1);
        }
    }
    return reached;
}

}  // namespace

std::unordered_set<std::uint64_t> bfs_reachable(const GridEnv& state, int k,
                                                std::size_t max_states) {
    return bfs_impl(
        state, k, max_states, hash_of(observe(state)).value, kNumActions,
        [](const GridEnv& env, int a) {
            GridEnv next = env;
            const StepResult sr = step(next, static_cast<Action>(a));
            const std::uint64_t obs = hash_of(sr.obs).value;
            const bool expandable = !next.episode_done;
            return std::tuple<GridEnv, std::uint64_t, bool>{std::move(next), obs, expandable};
        },
        [](const GridEnv& env) { return state_hash(env).value; }, !state.episode_done);
}

std::unordered_set<std::uint64_t> bfs_reachable(const PositionWorld& state, int k,
                                                std::size_t max_states) {
    return bfs_impl(
        state, k, max_states, state_hash(state).value, kNumMoves,
        [](const PositionWorld& world, int a) {
            PositionWorld next = world;
            move(next, a);
            const std::uint64_t obs = state_hash(next).value;
            return std::tuple<PositionWorld, std::uint64_t, bool>{std::move(next), obs, true};
        },
        [](const PositionWorld& world) { return state_hash(world).value; }, true);
}

}  // namespace gobi
