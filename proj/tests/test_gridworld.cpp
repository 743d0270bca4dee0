#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "gobi/gridworld.hpp"
#include "gobi/rng.hpp"
#include "oracles.hpp"

using namespace gobi;

namespace {

std::vector<std::uint8_t> env_bytes(const GridEnv& env) {
    std::vector<std::uint8_t> bytes;
    serialize(env, bytes);
    return bytes;
}

int count_kind(const GridEnv& env, ObjectKind kind, DoorState state = DoorState::Open,
               bool match_state = false) {
    int n = 0;
    for (const Cell& c : env.grid)
        if (c.kind == kind && (!match_state || c.state == state)) ++n;
    return n;
}

}  // namespace

TEST_CASE("multiroom generation is seed-deterministic") {
    const GridEnv a = generate_multiroom(1, 2, 5);
    const GridEnv b = generate_multiroom(1, 2, 5);
    CHECK(env_bytes(a) == env_bytes(b));
    CHECK(a.max_steps == 200);
    CHECK(a.mission == Mission::ReachGoal);
    CHECK(count_kind(a, ObjectKind::Goal) == 1);
    CHECK(count_kind(a, ObjectKind::Door) == 1);
    CHECK(test::solvable_by_search(a));

    const GridEnv c = generate_multiroom(2, 2, 5);
    CHECK(env_bytes(a) != env_bytes(c));
}

TEST_CASE("multiroom layouts over 100 seeds are solvable by full-state search") {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const GridEnv env = generate_multiroom(seed, 4, 6);
        CHECK(count_kind(env, ObjectKind::Door) == 3);
        REQUIRE_MESSAGE(test::solvable_by_search(env), "seed ", seed);
    }
}

TEST_CASE("multiroom rejects degenerate parameters") {
    CHECK_THROWS_AS(generate_multiroom(1, 1, 5), std::invalid_argument);
    CHECK_THROWS_AS(generate_multiroom(1, 2, 3), std::invalid_argument);
}

TEST_CASE("keycorridor topology and determinism") {
    const GridEnv a = generate_keycorridor(7, 3, 3);
    const GridEnv b = generate_keycorridor(7, 3, 3);
    CHECK(env_bytes(a) == env_bytes(b));
    CHECK(a.mission == Mission::PickupTargetBall);
    CHECK(a.target_color == Color::Green);
    CHECK(a.width == 7);
    CHECK(a.height == 7);
    CHECK(count_kind(a, ObjectKind::Key) == 1);
    CHECK(count_kind(a, ObjectKind::Ball) == 1);
    CHECK(count_kind(a, ObjectKind::Door, DoorState::Locked, true) == 1);

    // key colour matches the locked door
    Color locked = Color::Red, key = Color::Grey;
    for (const Cell& c : a.grid) {
        if (c.kind == ObjectKind::Door && c.state == DoorState::Locked) locked = c.color;
        if (c.kind == ObjectKind::Key) key = c.color;
    }
    CHECK(locked == key);
}

TEST_CASE("keycorridor layouts over 50 seeds fall to the scripted key-door-ball plan") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const GridEnv env = generate_keycorridor(seed, 3, 3);
        REQUIRE_MESSAGE(test::keycorridor_scripted_solve(env), "seed ", seed);
    }
}

TEST_CASE("goal reward formula") {
    CHECK(goal_reward(0, 200) == 1.0);
    CHECK(goal_reward(100, 200) == 1.0 - 0.9 * (100.0 / 200.0));
    CHECK(goal_reward(100, 200) == doctest::Approx(0.55).epsilon(1e-12));
}

TEST_CASE("step semantics") {
    GridEnv env = test::make_empty_room(8, 8, {3, 3}, Dir::North);

    SUBCASE("forward into a wall leaves the position unchanged") {
        env.agent_pos = {1, 1};
        env.agent_dir = Dir::West;
        const StepResult sr = step(env, Action::Forward);
        CHECK(env.agent_pos == Vec2i{1, 1});
        CHECK(sr.r_ext == 0.0);
        CHECK_FALSE(sr.done);
    }

    SUBCASE("four left turns restore the observation") {
        const Observation before = observe(env);
        for (int i = 0; i < 4; ++i) step(env, Action::Left);
        CHECK(observe(env) == before);
    }

    SUBCASE("reaching the goal ends the episode with the shaped reward") {
        env.at(3, 2) = make_goal();
        const StepResult sr = step(env, Action::Forward);
        CHECK(sr.success);
        CHECK(sr.done);
        CHECK(sr.r_ext == goal_reward(1, env.max_steps));
        CHECK_THROWS_AS(step(env, Action::Forward), std::logic_error);
    }

    SUBCASE("episode truncates at max_steps without reward") {
        env.max_steps = 3;
        step(env, Action::Left);
        step(env, Action::Left);
        const StepResult sr = step(env, Action::Left);
        CHECK(sr.done);
        CHECK_FALSE(sr.success);
        CHECK(sr.r_ext == 0.0);
    }

    SUBCASE("pickup, drop, and toggle on objects") {
        env.at(3, 2) = make_key(Color::Blue);
        step(env, Action::Pickup);
        REQUIRE(env.carrying.has_value());
        CHECK(env.carrying->kind == ObjectKind::Key);
        CHECK(env.at(3, 2).kind == ObjectKind::Empty);

        // cannot pick up while carrying
        env.at(3, 2) = make_ball(Color::Red);
        step(env, Action::Pickup);
        CHECK(env.carrying->kind == ObjectKind::Key);
        CHECK(env.at(3, 2).kind == ObjectKind::Ball);

        // drop requires an empty front cell
        step(env, Action::Drop);
        CHECK(env.carrying.has_value());
        step(env, Action::Right);
        step(env, Action::Drop);
        CHECK_FALSE(env.carrying.has_value());
        CHECK(env.at(4, 3).kind == ObjectKind::Key);
    }

    SUBCASE("doors: toggle cycles open/closed, locked needs the matching key") {
        env.at(3, 2) = make_door(Color::Blue, DoorState::Locked);
        step(env, Action::Toggle);
        CHECK(env.at(3, 2).state == DoorState::Locked);

        env.carrying = make_key(Color::Red);
        step(env, Action::Toggle);
        CHECK(env.at(3, 2).state == DoorState::Locked);

        env.carrying = make_key(Color::Blue);
        step(env, Action::Toggle);
        CHECK(env.at(3, 2).state == DoorState::Open);

        step(env, Action::Toggle);
        CHECK(env.at(3, 2).state == DoorState::Closed);

        // closed door blocks forward movement
        step(env, Action::Forward);
        CHECK(env.agent_pos == Vec2i{3, 3});

        step(env, Action::Toggle);
        CHECK(env.at(3, 2).state == DoorState::Open);
        step(env, Action::Forward);
        CHECK(env.agent_pos == Vec2i{3, 2});
    }
}

TEST_CASE("observation occlusion: an enclosed agent sees only the box around it") {
    GridEnv env = test::make_empty_room(9, 9, {4, 4}, Dir::North);
    env.at(3, 3) = make_wall();
    env.at(4, 3) = make_wall();
    env.at(5, 3) = make_wall();
    env.at(3, 4) = make_wall();
    env.at(5, 4) = make_wall();
    env.at(3, 5) = make_wall();
    env.at(4, 5) = make_wall();
    env.at(5, 5) = make_wall();

    const Observation obs = observe(env);
    int unseen = 0;
    for (int y = 0; y < 7; ++y)
        for (int x = 0; x < 7; ++x)
            if (obs.at(x, y, 0) == static_cast<std::uint8_t>(ObjectKind::Unseen)) ++unseen;
    // the view does not extend behind the agent, so only the agent cell and
    // the five adjacent in-view wall cells are visible
    CHECK(unseen == 49 - 6);
}

TEST_CASE("panorama is pure and matches explicit left turns") {
    const GridEnv env = generate_multiroom(5, 2, 5);
    const auto before = env_bytes(env);
    const Panorama pano = panorama(env);
    CHECK(env_bytes(env) == before);

    GridEnv turning = env;
    for (int i = 0; i < 4; ++i) {
        CHECK(pano.views[i] == observe(turning));
        turning.agent_dir = left_of(turning.agent_dir);
    }
}

TEST_CASE("snapshot round-trips and replays identically") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 3; ++trial) {
        GridEnv env = generate_multiroom(rng(), 3, 5);
        for (int warm = 0; warm < 5; ++warm)
            step(env, static_cast<Action>(uniform_below(rng, kNumActions)));

        const Snapshot snap = snapshot(env);
        std::vector<Action> actions;
        for (int i = 0; i < 25; ++i)
            actions.push_back(static_cast<Action>(uniform_below(rng, kNumActions)));

        GridEnv a = restore(snap);
        GridEnv b = restore(snap);
        CHECK(env_bytes(a) == env_bytes(env));
        for (const Action act : actions) {
            if (a.episode_done) break;
            const StepResult ra = step(a, act);
            const StepResult rb = step(b, act);
            CHECK(ra.obs == rb.obs);
            CHECK(ra.r_ext == rb.r_ext);
            CHECK(ra.done == rb.done);
        }
        CHECK(env_bytes(a) == env_bytes(b));
    }
}

TEST_CASE("position world movement") {
    PositionWorld world;
    world.width = 3;
    world.height = 3;
    world.walls.assign(9, 0);
    world.set_wall(1, 0, true);
    world.agent_pos = {1, 1};

    move(world, 0);  // north: blocked by the wall at (1,0)
    CHECK(world.agent_pos == Vec2i{1, 1});
    move(world, 1);  // east
    CHECK(world.agent_pos == Vec2i{2, 1});
    move(world, 1);  // east again: border is a no-op
    CHECK(world.agent_pos == Vec2i{2, 1});
    move(world, 2);  // south
    CHECK(world.agent_pos == Vec2i{2, 2});

    CHECK(state_hash(world) == position_hash({2, 2}));
    CHECK_THROWS_AS(move(world, 4), std::invalid_argument);
}

TEST_CASE("environment ids parse and round-trip") {
    const EnvSpec mr = EnvSpec::parse("multiroom-N4-S6");
    CHECK(mr.family == EnvSpec::Family::MultiRoom);
    CHECK(mr.param_a == 4);
    CHECK(mr.param_b == 6);
    CHECK(mr.id() == "multiroom-N4-S6");

    const EnvSpec kc = EnvSpec::parse("keycorridor-S3-R2");
    CHECK(kc.family == EnvSpec::Family::KeyCorridor);
    CHECK(kc.id() == "keycorridor-S3-R2");

    CHECK_THROWS_AS(EnvSpec::parse("multiroom-X2"), std::invalid_argument);
    CHECK_THROWS_AS(EnvSpec::parse("multiroom-N2-S5-extra"), std::invalid_argument);
}
