#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "gobi/harness.hpp"
#include "gobi/reachability.hpp"
#include "gobi/rng.hpp"
#include "oracles.hpp"

using namespace gobi;

namespace {

// Three-cell corridor opening into the left edge of a 2x3 room:
//
//   # # # # # # #
//   # # # # D G #
//   # A B C E H #
//   # # # # F I #
//   # # # # # # #
//
// Walking A -> B -> C, the 2-step reachable set grows by exactly 3 new
// states (D, F, H) on the final move.
PositionWorld corridor_into_room() {
    PositionWorld world;
    world.width = 7;
    world.height = 5;
    world.walls.assign(static_cast<std::size_t>(world.width) * world.height, 1);
    for (const Vec2i c : {Vec2i{1, 2}, Vec2i{2, 2}, Vec2i{3, 2},   // corridor A B C
                          Vec2i{4, 1}, Vec2i{4, 2}, Vec2i{4, 3},   // room D E F
                          Vec2i{5, 1}, Vec2i{5, 2}, Vec2i{5, 3}})  // room G H I
        world.set_wall(c.x, c.y, false);
    world.agent_pos = {1, 2};
    return world;
}

}  // namespace

TEST_CASE("corridor walk expands the 2-step reachable set by exactly 3") {
    PositionWorld world = corridor_into_room();
    const OraclePositionDynamics model(world);
    EpisodicBuffer buffer;

    // s0 = A
    expand_exhaustive(buffer, state_hash(world), ModelState{world.agent_pos}, model, 2);
    CHECK(buffer.size() == 3);  // A, B, C

    move(world, 1);  // s1 = B
    const int delta_s1 =
        expand_exhaustive(buffer, state_hash(world), ModelState{world.agent_pos}, model, 2);
    CHECK(delta_s1 == 1);  // E joins

    move(world, 1);  // s2 = C
    const int delta_s2 =
        expand_exhaustive(buffer, state_hash(world), ModelState{world.agent_pos}, model, 2);
    CHECK(delta_s2 == 3);  // D, F, H join
    CHECK(buffer.size() == 7);
}

TEST_CASE("expanding twice from an unmoved state adds nothing") {
    PositionWorld world = corridor_into_room();
    const OraclePositionDynamics model(world);
    EpisodicBuffer buffer;
    std::mt19937_64 rng(1);

    const ExpansionConfig config{1, 1, ActionMode::EnumerateAll};
    const int first =
        expand(buffer, state_hash(world), ModelState{world.agent_pos}, model, config, rng);
    CHECK(first >= 1);
    const int second =
        expand(buffer, state_hash(world), ModelState{world.agent_pos}, model, config, rng);
    CHECK(second == 0);
}

TEST_CASE("EnumerateAll rejects multi-step expansion") {
    PositionWorld world = corridor_into_room();
    const OraclePositionDynamics model(world);
    EpisodicBuffer buffer;
    std::mt19937_64 rng(1);
    const ExpansionConfig config{2, 1, ActionMode::EnumerateAll};
    CHECK_THROWS_AS(
        expand(buffer, state_hash(world), ModelState{world.agent_pos}, model, config, rng),
        std::invalid_argument);
}

TEST_CASE("delta_m never exceeds its bound") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        const PositionWorld world = random_position_world(rng);
        const OraclePositionDynamics model(world);
        EpisodicBuffer buffer;

        ExpansionConfig config;
        config.action_mode =
            uniform01(rng) < 0.5 ? ActionMode::EnumerateAll : ActionMode::SampleRandom;
        if (config.action_mode == ActionMode::EnumerateAll) {
            config.k = 1;
            const int delta = expand(buffer, state_hash(world), ModelState{world.agent_pos},
                                     model, config, rng);
            CHECK(delta <= 1 + kNumMoves);
        } else {
            config.k = 1 + static_cast<int>(uniform_below(rng, 3));
            config.n = 1 + static_cast<int>(uniform_below(rng, 6));
            const int delta = expand(buffer, state_hash(world), ModelState{world.agent_pos},
                                     model, config, rng);
            CHECK(delta <= 1 + config.k * config.n);
        }
        CHECK(buffer.size() >= 1);
    }
}

TEST_CASE("buffer reset clears state and keeps episodes independent") {
    PositionWorld world = corridor_into_room();
    const OraclePositionDynamics model(world);
    std::mt19937_64 rng(3);
    EpisodicBuffer buffer;

    const ExpansionConfig config{2, 3, ActionMode::SampleRandom};
    expand(buffer, state_hash(world), ModelState{world.agent_pos}, model, config, rng);
    CHECK(buffer.size() >= 1);

    buffer.reset();
    CHECK(buffer.size() == 0);
    CHECK(buffer.insertions() == 0);

    const int delta =
        expand(buffer, state_hash(world), ModelState{world.agent_pos}, model, config, rng);
    CHECK(delta >= 1);  // the current state is always new after a reset
}

TEST_CASE("buffer size is monotone within an episode") {
    std::mt19937_64 rng(5);
    PositionWorld world = random_position_world(rng);
    const OraclePositionDynamics model(world);
    EpisodicBuffer buffer;
    const ExpansionConfig config{2, 2, ActionMode::SampleRandom};

    std::size_t last = 0;
    for (int t = 0; t < 40; ++t) {
        expand(buffer, state_hash(world), ModelState{world.agent_pos}, model, config, rng);
        CHECK(buffer.size() >= last);
        last = buffer.size();
        move(world, static_cast<int>(uniform_below(rng, kNumMoves)));
    }
}

TEST_CASE("a model that never predicts reduces the episodic term to first-visit novelty") {
    const TabularDynamics empty;
    EpisodicBuffer buffer;
    std::mt19937_64 rng(9);
    const ExpansionConfig config{3, 4, ActionMode::SampleRandom};

    for (std::uint64_t code = 100; code < 110; ++code) {
        const int fresh =
            expand(buffer, HashCode{code}, ModelState{HashCode{code}}, empty, config, rng);
        CHECK(fresh == 1);
        const int again =
            expand(buffer, HashCode{code}, ModelState{HashCode{code}}, empty, config, rng);
        CHECK(again == 0);
    }
}

TEST_CASE("bfs_reachable base cases") {
    PositionWorld world;
    world.width = 3;
    world.height = 3;
    world.walls.assign(9, 0);
    world.agent_pos = {1, 1};

    SUBCASE("k = 0 is exactly the current state") {
        const auto reached = bfs_reachable(world, 0);
        CHECK(reached.size() == 1);
        CHECK(reached.contains(state_hash(world).value));
    }

    SUBCASE("open 3x3 world, centre start, k = 1 reaches 5 states") {
        CHECK(bfs_reachable(world, 1).size() == 5);
    }

    SUBCASE("grid environments reach at most 8 observation hashes at k = 1") {
        const GridEnv env = generate_multiroom(31, 2, 5);
        CHECK(bfs_reachable(env, 1).size() <= 8);
    }

    SUBCASE("the state cap is enforced") {
        const GridEnv env = generate_multiroom(31, 3, 6);
        CHECK_THROWS_AS(bfs_reachable(env, 3, 4), std::runtime_error);
    }
}

TEST_CASE("exhaustive oracle expansion equals breadth-first reachability") {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 25; ++trial) {
        const PositionWorld world = random_position_world(rng);
        const OraclePositionDynamics model(world);
        for (int k = 1; k <= 3; ++k) {
            EpisodicBuffer buffer;
            expand_exhaustive(buffer, state_hash(world), ModelState{world.agent_pos}, model, k);
            CHECK(buffer.codes() == bfs_reachable(world, k));
        }
    }
}

TEST_CASE("expansion along a trajectory accumulates the union of reachable sets") {
    std::mt19937_64 rng(4321);
    for (int trial = 0; trial < 10; ++trial) {
        PositionWorld world = random_position_world(rng);
        const OraclePositionDynamics model(world);
        const int k = 1 + static_cast<int>(uniform_below(rng, 3));

        EpisodicBuffer buffer;
        std::unordered_set<std::uint64_t> expected;
        for (int t = 0; t < 12; ++t) {
            expand_exhaustive(buffer, state_hash(world), ModelState{world.agent_pos}, model, k);
            expected.merge(bfs_reachable(world, k));
            CHECK(buffer.codes() == expected);
            move(world, static_cast<int>(uniform_below(rng, kNumMoves)));
        }
    }
}
