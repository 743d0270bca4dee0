#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>
#include <unordered_set>

#include "gobi/hash.hpp"

namespace gobi::test {

std::uint64_t fnv1a_reference(std::span<const std::uint8_t> bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const std::uint8_t b : bytes) h = (h ^ b) * 0x100000001b3ULL;
    return h;
}

namespace {

std::uint64_t plan_identity(const GridEnv& env) {
    GridEnv copy = env;
    copy.step_count = 0;  // plans may reach the same state along paths of different length
    return state_hash(copy).value;
}

}  // namespace

std::optional<std::vector<Action>> bfs_plan(const GridEnv& start, const GoalPredicate& goal,
                                            std::size_t max_nodes) {
    struct Node {
        GridEnv env;
        std::size_t parent;
        Action action;
    };
    if (goal(start, StepResult{})) return std::vector<Action>{};

    std::vector<Node> nodes;
    nodes.push_back({start, SIZE_MAX, Action::Done});
    std::unordered_set<std::uint64_t> seen{plan_identity(start)};
    std::deque<std::size_t> queue{0};

    while (!queue.empty()) {
        const std::size_t idx = queue.front();
        queue.pop_front();
        if (nodes[idx].env.episode_done) continue;
        for (int a = 0; a < kNumActions; ++a) {
            GridEnv next = nodes[idx].env;
            const StepResult sr = step(next, static_cast<Action>(a));
            const bool reached = goal(next, sr);
            if (!reached && !seen.insert(plan_identity(next)).second) continue;
            nodes.push_back({std::move(next), idx, static_cast<Action>(a)});
            if (reached) {
                std::vector<Action> plan;
                for (std::size_t i = nodes.size() - 1; i != 0; i = nodes[i].parent)
                    plan.push_back(nodes[i].action);
                std::reverse(plan.begin(), plan.end());
                return plan;
            }
            if (nodes.size() > max_nodes) return std::nullopt;
            queue.push_back(nodes.size() - 1);
        }
    }
    return std::nullopt;
}

bool solvable_by_search(const GridEnv& env) {
    const auto plan = bfs_plan(
        env, [](const GridEnv&, const StepResult& sr) { return sr.success; });
    return plan.has_value();
}

bool keycorridor_scripted_solve(const GridEnv& env) {
    GridEnv live = env;

    Vec2i locked_door{-1, -1};
    for (int y = 0; y < live.height; ++y)
        for (int x = 0; x < live.width; ++x) {
            const Cell& c = live.at(x, y);
            if (c.kind == ObjectKind::Door && c.state == DoorState::Locked) locked_door = {x, y};
        }
    if (locked_door.x < 0) return false;

    const auto execute = [&](const GoalPredicate& goal) {
        const auto plan = bfs_plan(live, goal);
        if (!plan) return false;
        for (const Action a : *plan) step(live, a);
        return true;
    };

    const bool got_key = execute([](const GridEnv& e, const StepResult&) {
        return e.carrying && e.carrying->kind == ObjectKind::Key;
    });
    if (!got_key) return false;

    const bool opened = execute([locked_door](const GridEnv& e, const StepResult&) {
        return e.at(locked_door.x, locked_door.y).state == DoorState::Open;
    });
    if (!opened) return false;

    return execute([](const GridEnv&, const StepResult& sr) { return sr.success; }) &&
           live.episode_done;
}

double brute_knn_distance(std::span<const double> bank, int dim, std::span<const double> query,
                          int k) {
    std::vector<double> dists;
    const std::size_t entries = bank.size() / dim;
    dists.reserve(entries);
    for (std::size_t e = 0; e < entries; ++e) {
        double sq = 0.0;
        for (int j = 0; j < dim; ++j) {
            const double d = query[j] - bank[e * dim + j];
            sq += d * d;
        }
        dists.push_back(std::sqrt(sq));
    }
    std::sort(dists.begin(), dists.end());
    return dists[k - 1];
}

double chi_square_uniform(std::span<const std::uint64_t> observed) {
    std::uint64_t total = 0;
    for (const std::uint64_t o : observed) total += o;
    const double expected = static_cast<double>(total) / static_cast<double>(observed.size());
    double stat = 0.0;
    for (const std::uint64_t o : observed) {
        const double d = static_cast<double>(o) - expected;
        stat += d * d / expected;
    }
    return stat;
}

double decay_reference(double lambda0, double rho, std::uint64_t episode_len, std::uint64_t e) {
    const long double exponent =
        static_cast<long double>(e - 1) * static_cast<long double>(episode_len);
    const long double log_base = std::log1p(static_cast<long double>(-rho));
    return static_cast<double>(static_cast<long double>(lambda0) * std::exp(exponent * log_base));
}

GridEnv make_empty_room(int width, int height, Vec2i agent, Dir dir) {
    GridEnv env;
    env.width = width;
    env.height = height;
    env.grid.assign(static_cast<std::size_t>(width) * height, make_wall());
    for (int y = 1; y < height - 1; ++y)
        for (int x = 1; x < width - 1; ++x) env.at(x, y) = make_empty();
    env.agent_pos = agent;
    env.agent_dir = dir;
    env.max_steps = 100000;
    env.mission = Mission::ReachGoal;
    return env;
}

}  // namespace gobi::test
