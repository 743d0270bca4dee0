#include "gobi/gridworld.hpp"

#include <cstdio>
#include <cstring>
#include <stdexcept>

#include "gobi/rng.hpp"

namespace gobi {

bool can_overlap(const Cell& c) {
    switch (c.kind) {
        case ObjectKind::Empty:
        case ObjectKind::Goal:
            return true;
        case ObjectKind::Door:
            return c.state == DoorState::Open;
        default:
            return false;
    }
}

bool can_pickup(const Cell& c) {
    return c.kind == ObjectKind::Key || c.kind == ObjectKind::Ball || c.kind == ObjectKind::Box;
}

bool see_behind(const Cell& c) {
    if (c.kind == ObjectKind::Wall) return false;
    if (c.kind == ObjectKind::Door) return c.state == DoorState::Open;
    return true;
}

Dir left_of(Dir d) { return static_cast<Dir>((static_cast<int>(d) + 3) % 4); }
Dir right_of(Dir d) { return static_cast<Dir>((static_cast<int>(d) + 1) % 4); }

Vec2i dir_vec(Dir d) {
    switch (d) {
        case Dir::North: return {0, -1};
        case Dir::East: return {1, 0};
        case Dir::South: return {0, 1};
        case Dir::West: return {-1, 0};
    }
    return {0, 0};
}

namespace {

constexpr int kV = Observation::kView;

struct ViewData {
    std::array<Cell, kV * kV> cells;
    std::array<Vec2i, kV * kV> world;
    std::array<bool, kV * kV> vis;
};

// Egocentric view with the agent at column 3 of the bottom row, facing the
// top of the view. Out-of-bounds cells read as walls; the agent's own cell
// shows the carried object, if any.
ViewData compute_view(const GridEnv& env, Dir facing) {
    ViewData v;
    const Vec2i f = dir_vec(facing);
    const Vec2i r = dir_vec(right_of(facing));
    for (int vy = 0; vy < kV; ++vy) {
        for (int vx = 0; vx < kV; ++vx) {
            const int ahead = (kV - 1) - vy;
            const int side = vx - kV / 2;
            const int wx = env.agent_pos.x + f.x * ahead + r.x * side;
            const int wy = env.agent_pos.y + f.y * ahead + r.y * side;
            v.world[vy * kV + vx] = {wx, wy};
            v.cells[vy * kV + vx] = env.in_bounds(wx, wy) ? env.at(wx, wy) : make_wall();
        }
    }
    const int agent_idx = (kV - 1) * kV + kV / 2;
    v.cells[agent_idx] = env.carrying ? *env.carrying : make_empty();

    // Shadow propagation from the agent cell. Opaque cells stay visible
    // themselves but do not extend visibility.
    v.vis.fill(false);
    v.vis[agent_idx] = true;
    for (int vy = kV - 1; vy >= 0; --vy) {
        for (int vx = 0; vx <= kV - 2; ++vx) {
            const int i = vy * kV + vx;
            if (!v.vis[i] || !see_behind(v.cells[i])) continue;
            v.vis[i + 1] = true;
            if (vy > 0) {
                v.vis[i + 1 - kV] = true;
                v.vis[i - kV] = true;
            }
        }
        for (int vx = kV - 1; vx >= 1; --vx) {
            const int i = vy * kV + vx;
            if (!v.vis[i] || !see_behind(v.cells[i])) continue;
            v.vis[i - 1] = true;
            if (vy > 0) {
                v.vis[i - 1 - kV] = true;
                v.vis[i - kV] = true;
            }
        }
    }
    return v;
}

Observation encode_view(const ViewData& v) {
    Observation obs;
    for (int i = 0; i < kV * kV; ++i) {
        const int vx = i % kV;
        const int vy = i / kV;
        if (!v.vis[i]) {
            obs.set(vx, vy, static_cast<std::uint8_t>(ObjectKind::Unseen), 0, 0);
            continue;
        }
        const Cell& c = v.cells[i];
        const std::uint8_t state =
            c.kind == ObjectKind::Door ? static_cast<std::uint8_t>(c.state) : 0;
        const std::uint8_t color =
            c.kind == ObjectKind::Empty ? 0 : static_cast<std::uint8_t>(c.color);
        obs.set(vx, vy, static_cast<std::uint8_t>(c.kind), color, state);
    }
    return obs;
}

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 24));
}

void append_i32(std::vector<std::uint8_t>& out, std::int32_t v) {
    append_u32(out, static_cast<std::uint32_t>(v));
}

}  // namespace

Observation observe(const GridEnv& env) { return encode_view(compute_view(env, env.agent_dir)); }

Panorama panorama(const GridEnv& env) {
    Panorama p;
    Dir d = env.agent_dir;
    for (int i = 0; i < 4; ++i) {
        p.views[i] = encode_view(compute_view(env, d));
        d = left_of(d);
    }
    return p;
}

std::vector<Vec2i> visible_world_cells(const GridEnv& env) {
    const ViewData v = compute_view(env, env.agent_dir);
    std::vector<Vec2i> out;
    out.reserve(kV * kV);
    for (int i = 0; i < kV * kV; ++i) {
        if (v.vis[i] && env.in_bounds(v.world[i].x, v.world[i].y)) out.push_back(v.world[i]);
    }
    return out;
}

HashCode hash_of(const Observation& obs) {
    return exact_hash(std::span<const std::uint8_t>(obs.values.data(), obs.values.size()));
}

HashCode hash_of(const Panorama& pano) {
    std::array<std::uint8_t, 4 * Observation::kBytes> bytes;
    for (int i = 0; i < 4; ++i)
        std::memcpy(bytes.data() + i * Observation::kBytes, pano.views[i].values.data(),
                    Observation::kBytes);
    return exact_hash(std::span<const std::uint8_t>(bytes.data(), bytes.size()));
}

double goal_reward(std::uint32_t step_count, std::uint32_t max_steps) {
    return 1.0 - 0.9 * (static_cast<double>(step_count) / static_cast<double>(max_steps));
}

StepResult step(GridEnv& env, Action action) {
    if (env.episode_done) throw std::logic_error("step: episode has already finished");
    env.step_count += 1;

    bool success = false;
    const Vec2i f = dir_vec(env.agent_dir);
    const Vec2i front{env.agent_pos.x + f.x, env.agent_pos.y + f.y};
    const bool front_ok = env.in_bounds(front.x, front.y);

    switch (action) {
        case Action::Left:
            env.agent_dir = left_of(env.agent_dir);
            break;
        case Action::Right:
            env.agent_dir = right_of(env.agent_dir);
            break;
        case Action::Forward:
            if (front_ok && can_overlap(env.at(front.x, front.y))) {
                env.agent_pos = front;
                if (env.mission == Mission::ReachGoal &&
                    env.at(front.x, front.y).kind == ObjectKind::Goal)
                    success = true;
            }
            break;
        case Action::Pickup:
            if (front_ok && !env.carrying && can_pickup(env.at(front.x, front.y))) {
                env.carrying = env.at(front.x, front.y);
                env.at(front.x, front.y) = make_empty();
                if (env.mission == Mission::PickupTargetBall &&
                    env.carrying->kind == ObjectKind::Ball &&
                    env.carrying->color == env.target_color)
                    success = true;
            }
            break;
        case Action::Drop:
            if (front_ok && env.carrying && env.at(front.x, front.y).kind == ObjectKind::Empty) {
                env.at(front.x, front.y) = *env.carrying;
                env.carrying.reset();
            }
            break;
        case Action::Toggle:
            if (front_ok) {
                Cell& c = env.at(front.x, front.y);
                if (c.kind == ObjectKind::Door) {
                    if (c.state == DoorState::Locked) {
                        if (env.carrying && env.carrying->kind == ObjectKind::Key &&
                            env.carrying->color == c.color)
                            c.state = DoorState::Open;
                    } else {
                        c.state = c.state == DoorState::Open ? DoorState::Closed : DoorState::Open;
                    }
                } else if (c.kind == ObjectKind::Box) {
                    c = make_empty();
                }
            }
            break;
        case Action::Done:
            break;
    }

    StepResult result;
    if (success) {
        env.episode_done = true;
        result.r_ext = goal_reward(env.step_count, env.max_steps);
    }
    if (env.step_count >= env.max_steps) env.episode_done = true;
    result.obs = observe(env);
    result.done = env.episode_done;
    result.success = success;
    return result;
}

Snapshot snapshot(const GridEnv& env) { return Snapshot{env}; }

GridEnv restore(const Snapshot& snap) { return snap.state; }

void serialize(const GridEnv& env, std::vector<std::uint8_t>& out) {
    out.clear();
    out.reserve(env.grid.size() * 3 + 32);
    append_u32(out, static_cast<std::uint32_t>(env.width));
    append_u32(out, static_cast<std::uint32_t>(env.height));
    for (const Cell& c : env.grid) {
        out.push_back(static_cast<std::uint8_t>(c.kind));
        out.push_back(static_cast<std::uint8_t>(c.color));
        out.push_back(static_cast<std::uint8_t>(c.state));
    }
    append_i32(out, env.agent_pos.x);
    append_i32(out, env.agent_pos.y);
    out.push_back(static_cast<std::uint8_t>(env.agent_dir));
    out.push_back(env.carrying ? 1 : 0);
    const Cell carried = env.carrying ? *env.carrying : Cell{};
    out.push_back(static_cast<std::uint8_t>(carried.kind));
    out.push_back(static_cast<std::uint8_t>(carried.color));
    out.push_back(static_cast<std::uint8_t>(carried.state));
    append_u32(out, env.step_count);
    append_u32(out, env.max_steps);
    out.push_back(env.episode_done ? 1 : 0);
    out.push_back(static_cast<std::uint8_t>(env.mission));
    out.push_back(static_cast<std::uint8_t>(env.target_color));
}

HashCode state_hash(const GridEnv& env) {
    std::vector<std::uint8_t> bytes;
    serialize(env, bytes);
    return exact_hash(bytes);
}

namespace {

struct Rect {
    int x = 0, y = 0, w = 0, h = 0;  // includes border walls

    bool overlaps(const Rect& o) const {
        return x < o.x + o.w && o.x < x + w && y < o.y + o.h && o.y < y + h;
    }
    bool contains(Vec2i p) const { return p.x >= x && p.x < x + w && p.y >= y && p.y < y + h; }
};

Vec2i random_interior_cell(std::mt19937_64& rng, const Rect& r) {
    const int ix = r.x + 1 + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(r.w - 2)));
    const int iy = r.y + 1 + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(r.h - 2)));
    return {ix, iy};
}

}  // namespace

GridEnv generate_multiroom(std::uint64_t seed, int n_rooms, int max_room_size) {
    if (n_rooms < 2) throw std::invalid_argument("generate_multiroom: n_rooms must be >= 2");
    if (max_room_size < 4) throw std::invalid_argument("generate_multiroom: max_room_size must be >= 4");

    const int side = std::max(25, std::min(120, 3 + n_rooms * (max_room_size - 1)));
    std::mt19937_64 rng(mix_seed(seed, 0x6d72));

    auto rand_span = [&](int lo, int hi) {  // inclusive
        return lo + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(hi - lo + 1)));
    };

    for (int attempt = 0; attempt < 400; ++attempt) {
        std::vector<Rect> rooms;
        std::vector<std::pair<Vec2i, Color>> doors;
        int entry_side = -1;  // wall of the current room holding its entry door

        const int w0 = rand_span(4, max_room_size);
        const int h0 = rand_span(4, max_room_size);
        rooms.push_back({rand_span(0, side - w0), rand_span(0, side - h0), w0, h0});

        bool ok = true;
        for (int i = 1; i < n_rooms && ok; ++i) {
            const Rect prev = rooms.back();
            bool placed = false;
            for (int t = 0; t < 120 && !placed; ++t) {
                const int dir = rand_span(0, 3);  // 0=N 1=E 2=S 3=W exit wall
                if (dir == entry_side) continue;
                const int w = rand_span(4, max_room_size);
                const int h = rand_span(4, max_room_size);
                Vec2i door;
                Rect next{0, 0, w, h};
                if (dir == 1 || dir == 3) {
                    door.x = dir == 1 ? prev.x + prev.w - 1 : prev.x;
                    door.y = rand_span(prev.y + 1, prev.y + prev.h - 2);
                    next.x = dir == 1 ? door.x : door.x - w + 1;
                    next.y = door.y - 1 - static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(h - 2)));
                } else {
                    door.y = dir == 2 ? prev.y + prev.h - 1 : prev.y;
                    door.x = rand_span(prev.x + 1, prev.x + prev.w - 2);
                    next.y = dir == 2 ? door.y : door.y - h + 1;
                    next.x = door.x - 1 - static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(w - 2)));
                }
                if (next.x < 0 || next.y < 0 || next.x + next.w > side || next.y + next.h > side)
                    continue;
                bool clash = false;
                for (std::size_t j = 0; j + 1 < rooms.size() && !clash; ++j)
                    clash = next.overlaps(rooms[j]);
                for (const auto& d : doors)
                    clash = clash || next.contains(d.first) || d.first == door;
                if (clash) continue;
                doors.emplace_back(door, static_cast<Color>(uniform_below(rng, kNumColors)));
                rooms.push_back(next);
                entry_side = (dir + 2) % 4;
                placed = true;
            }
            ok = placed;
        }
        if (!ok) continue;

        GridEnv env;
        env.width = side;
        env.height = side;
        env.grid.assign(static_cast<std::size_t>(side) * side, make_wall());
        for (const Rect& r : rooms)
            for (int y = r.y + 1; y < r.y + r.h - 1; ++y)
                for (int x = r.x + 1; x < r.x + r.w - 1; ++x) env.at(x, y) = make_empty();
        for (const auto& d : doors) env.at(d.first.x, d.first.y) = make_door(d.second, DoorState::Closed);

        const Vec2i goal = random_interior_cell(rng, rooms.back());
        env.at(goal.x, goal.y) = make_goal();
        env.agent_pos = random_interior_cell(rng, rooms.front());
        env.agent_dir = static_cast<Dir>(uniform_below(rng, 4));
        env.max_steps = static_cast<std::uint32_t>(20) * n_rooms * max_room_size;
        env.mission = Mission::ReachGoal;
        return env;
    }
    throw std::runtime_error("generate_multiroom: no valid layout found within retry budget");
}

GridEnv generate_keycorridor(std::uint64_t seed, int room_size, int rows) {
    if (room_size < 3) throw std::invalid_argument("generate_keycorridor: room_size must be >= 3");
    if (rows < 1) throw std::invalid_argument("generate_keycorridor: rows must be >= 1");

    std::mt19937_64 rng(mix_seed(seed, 0x6b63));
    const int s = room_size;
    const int width = 3 * (s - 1) + 1;
    const int height = rows * (s - 1) + 1;

    GridEnv env;
    env.width = width;
    env.height = height;
    env.grid.assign(static_cast<std::size_t>(width) * height, make_wall());

    auto room = [&](int col, int row) {
        return Rect{col * (s - 1), row * (s - 1), s, s};
    };
    for (int col = 0; col < 3; ++col)
        for (int row = 0; row < rows; ++row) {
            const Rect r = room(col, row);
            for (int y = r.y + 1; y < r.y + r.h - 1; ++y)
                for (int x = r.x + 1; x < r.x + r.w - 1; ++x) env.at(x, y) = make_empty();
        }
    // Middle column becomes one corridor: drop the walls between its rooms.
    for (int row = 1; row < rows; ++row) {
        const int y = row * (s - 1);
        for (int x = (s - 1) + 1; x < 2 * (s - 1); ++x) env.at(x, y) = make_empty();
    }

    const int x_left = s - 1;
    const int x_right = 2 * (s - 1);
    const int locked_row = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(rows)));
    const Color locked_color = static_cast<Color>(uniform_below(rng, kNumColors));
    for (int row = 0; row < rows; ++row) {
        const int yl = row * (s - 1) + 1 + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(s - 2)));
        env.at(x_left, yl) = make_door(static_cast<Color>(uniform_below(rng, kNumColors)), DoorState::Closed);
        const int yr = row * (s - 1) + 1 + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(s - 2)));
        env.at(x_right, yr) = row == locked_row
                                  ? make_door(locked_color, DoorState::Locked)
                                  : make_door(static_cast<Color>(uniform_below(rng, kNumColors)),
                                              DoorState::Closed);
    }

    const Vec2i ball = random_interior_cell(rng, room(2, locked_row));
    env.at(ball.x, ball.y) = make_ball(Color::Green);
    const int key_row = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(rows)));
    const Vec2i key = random_interior_cell(rng, room(0, key_row));
    env.at(key.x, key.y) = make_key(locked_color);

    std::vector<Vec2i> corridor;
    for (int y = 0; y < height; ++y)
        for (int x = x_left + 1; x < x_right; ++x)
            if (env.at(x, y).kind == ObjectKind::Empty) corridor.push_back({x, y});
    env.agent_pos = corridor[uniform_below(rng, corridor.size())];
    env.agent_dir = static_cast<Dir>(uniform_below(rng, 4));
    env.mission = Mission::PickupTargetBall;
    env.target_color = Color::Green;
    env.max_steps = static_cast<std::uint32_t>(8) * s * s * rows;
    return env;
}

void move(PositionWorld& world, int action) {
    world.agent_pos = moved_position(world, world.agent_pos, action);
}

Vec2i moved_position(const PositionWorld& world, Vec2i from, int action) {
    if (action < 0 || action >= kNumMoves) throw std::invalid_argument("move: bad action index");
    static constexpr Vec2i kDelta[kNumMoves] = {{0, -1}, {1, 0}, {0, 1}, {-1, 0}};
    const Vec2i to{from.x + kDelta[action].x, from.y + kDelta[action].y};
    return world.wall_at(to.x, to.y) ? from : to;
}

HashCode position_hash(Vec2i pos) {
    std::array<std::uint8_t, 8> bytes{};
    const auto put = [&](int offset, std::int32_t v) {
        const auto u = static_cast<std::uint32_t>(v);
        bytes[offset] = static_cast<std::uint8_t>(u);
        bytes[offset + 1] = static_cast<std::uint8_t>(u >> 8);
        bytes[offset + 2] = static_cast<std::uint8_t>(u >> 16);
        bytes[offset + 3] = static_cast<std::uint8_t>(u >> 24);
    };
    put(0, pos.x);
    put(4, pos.y);
    return exact_hash(std::span<const std::uint8_t>(bytes.data(), bytes.size()));
}

HashCode state_hash(const PositionWorld& world) { return position_hash(world.agent_pos); }

std::string EnvSpec::id() const {
    char buf[64];
    if (family == Family::MultiRoom)
        std::snprintf(buf, sizeof buf, "multiroom-N%d-S%d", param_a, param_b);
    else
        std::snprintf(buf, sizeof buf, "keycorridor-S%d-R%d", param_a, param_b);
    return buf;
}

GridEnv EnvSpec::make(std::uint64_t seed) const {
    return family == Family::MultiRoom ? generate_multiroom(seed, param_a, param_b)
                                       : generate_keycorridor(seed, param_a, param_b);
}

EnvSpec EnvSpec::parse(const std::string& id) {
    EnvSpec spec;
    int a = 0, b = 0;
    char tail = 0;
    if (std::sscanf(id.c_str(), "multiroom-N%d-S%d%c", &a, &b, &tail) == 2) {
        spec.family = Family::MultiRoom;
    } else if (std::sscanf(id.c_str(), "keycorridor-S%d-R%d%c", &a, &b, &tail) == 2) {
        spec.family = Family::KeyCorridor;
    } else {
        throw std::invalid_argument("unrecognised environment id: " + id);
    }
    spec.param_a = a;
    spec.param_b = b;
    if (spec.id() != id) throw std::invalid_argument("malformed environment id: " + id);
    return spec;
}

}  // namespace gobi
