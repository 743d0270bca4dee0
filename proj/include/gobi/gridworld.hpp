#ifndef GOBI_GRIDWORLD_HPP
#define GOBI_GRIDWORLD_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gobi/hash.hpp"

namespace gobi {

// Object ids follow the standard Minigrid observation encoding so that
// hashes of encoded views are well-defined and portable.
enum class ObjectKind : std::uint8_t {
    Unseen = 0,
    Empty = 1,
    Wall = 2,
    Door = 4,
    Key = 5,
    Ball = 6,
    Box = 7,
    Goal = 8,
};

enum class Color : std::uint8_t { Red = 0, Green = 1, Blue = 2, Purple = 3, Yellow = 4, Grey = 5 };
inline constexpr int kNumColors = 6;

enum class DoorState : std::uint8_t { Open = 0, Closed = 1, Locked = 2 };

struct Cell {
    ObjectKind kind = ObjectKind::Empty;
    Color color = Color::Red;
    DoorState state = DoorState::Open;  // Open for every non-door kind

    bool operator==(const Cell&) const = default;
};

inline Cell make_empty() { return Cell{}; }
inline Cell make_wall() { return Cell{ObjectKind::Wall, Color::Grey, DoorState::Open}; }
inline Cell make_goal() { return Cell{ObjectKind::Goal, Color::Green, DoorState::Open}; }
inline Cell make_door(Color c, DoorState s) { return Cell{ObjectKind::Door, c, s}; }
inline Cell make_key(Color c) { return Cell{ObjectKind::Key, c, DoorState::Open}; }
inline Cell make_ball(Color c) { return Cell{ObjectKind::Ball, c, DoorState::Open}; }

// The agent can stand on empty cells, goals, and open doors.
bool can_overlap(const Cell& c);
// Keys, balls, and boxes can be carried.
bool can_pickup(const Cell& c);
// Walls and non-open doors block sight.
bool see_behind(const Cell& c);

enum class Dir : std::uint8_t { North = 0, East = 1, South = 2, West = 3 };

struct Vec2i {
    int x = 0;
    int y = 0;
    bool operator==(const Vec2i&) const = default;
};

Dir left_of(Dir d);
Dir right_of(Dir d);
Vec2i dir_vec(Dir d);

enum class Action : std::uint8_t {
    Left = 0,
    Right = 1,
    Forward = 2,
    Pickup = 3,
    Drop = 4,
    Toggle = 5,
    Done = 6,
};
inline constexpr int kNumActions = 7;

// 7x7 egocentric view, three channels per visible cell (object id, color
// id, state id). Cells occluded by walls or closed doors carry the
// reserved "unseen" object id.
struct Observation {
    static constexpr int kView = 7;
    static constexpr int kBytes = kView * kView * 3;
    std::array<std::uint8_t, kBytes> values{};

    std::uint8_t at(int x, int y, int ch) const { return values[(y * kView + x) * 3 + ch]; }
    void set(int x, int y, std::uint8_t obj, std::uint8_t color, std::uint8_t state) {
        const int base = (y * kView + x) * 3;
        values[base] = obj;
        values[base + 1] = color;
        values[base + 2] = state;
    }
    bool operator==(const Observation&) const = default;
};

// Four views in left-turn order: views[i] equals observe() after i left
// turns. Rotation-invariant up to cyclic shift; the dynamics-model input.
struct Panorama {
    std::array<Observation, 4> views{};
    bool operator==(const Panorama&) const = default;
};

HashCode hash_of(const Observation& obs);
HashCode hash_of(const Panorama& pano);

enum class Mission : std::uint8_t { ReachGoal = 0, PickupTargetBall = 1 };

struct GridEnv {
    int width = 0;
    int height = 0;
    std::vector<Cell> grid;  // row-major, index y * width + x
    Vec2i agent_pos{};
    Dir agent_dir = Dir::North;
    std::optional<Cell> carrying;
    std::uint32_t step_count = 0;
    std::uint32_t max_steps = 1;
    bool episode_done = false;
    Mission mission = Mission::ReachGoal;
    Color target_color = Color::Green;

    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    Cell& at(int x, int y) { return grid[static_cast<std::size_t>(y) * width + x]; }
    const Cell& at(int x, int y) const { return grid[static_cast<std::size_t>(y) * width + x]; }
};

struct StepResult {
    Observation obs;
    double r_ext = 0.0;
    bool done = false;
    bool success = false;  // mission completed on this step
};

// Applies one action. Throws std::logic_error if the episode has finished.
StepResult step(GridEnv& env, Action action);

Observation observe(const GridEnv& env);
Panorama panorama(const GridEnv& env);

// World coordinates of the cells visible in the current view. Used for
// "seen but not visited" bookkeeping.
std::vector<Vec2i> visible_world_cells(const GridEnv& env);

// Reward on mission completion: 1 - 0.9 * (step_count / max_steps).
double goal_reward(std::uint32_t step_count, std::uint32_t max_steps);

// Complete copy of the environment's mutable state. GridEnv has value
// semantics, so a snapshot is a stored copy.
struct Snapshot {
    GridEnv state;
};

Snapshot snapshot(const GridEnv& env);
GridEnv restore(const Snapshot& snap);

// Canonical little-endian serialization of the full environment state.
void serialize(const GridEnv& env, std::vector<std::uint8_t>& out);
HashCode state_hash(const GridEnv& env);

// Procedural generators. Identical seed gives a byte-identical layout.
// Throw std::runtime_error when no valid layout is found within a bounded
// number of retries.
GridEnv generate_multiroom(std::uint64_t seed, int n_rooms, int max_room_size);
GridEnv generate_keycorridor(std::uint64_t seed, int room_size, int rows);

// Fully observable world whose state is the agent position alone: four
// movement actions, moving into a wall is a no-op. Used by the exact
// reachability oracles.
struct PositionWorld {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> walls;  // 1 = wall, row-major
    Vec2i agent_pos{};

    bool wall_at(int x, int y) const {
        if (x < 0 || x >= width || y < 0 || y >= height) return true;
        return walls[static_cast<std::size_t>(y) * width + x] != 0;
    }
    void set_wall(int x, int y, bool w) { walls[static_cast<std::size_t>(y) * width + x] = w ? 1 : 0; }
};

inline constexpr int kNumMoves = 4;  // N, E, S, W

// Applies movement action in [0, kNumMoves); no-op into walls or borders.
void move(PositionWorld& world, int action);
Vec2i moved_position(const PositionWorld& world, Vec2i from, int action);

HashCode position_hash(Vec2i pos);
HashCode state_hash(const PositionWorld& world);

// String ids of the form multiroom-N{n}-S{s} and keycorridor-S{s}-R{r}.
struct EnvSpec {
    enum class Family : std::uint8_t { MultiRoom, KeyCorridor };

    Family family = Family::MultiRoom;
    int param_a = 2;  // multiroom: n_rooms;  keycorridor: room_size
    int param_b = 5;  // multiroom: max_room_size;  keycorridor: rows

    std::string id() const;
    GridEnv make(std::uint64_t seed) const;
    static EnvSpec parse(const std::string& id);  // throws std::invalid_argument

    bool operator==(const EnvSpec&) const = default;
};

}  // namespace gobi

#endif
