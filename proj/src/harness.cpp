#include "gobi/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "gobi/rng.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace gobi {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json epsilon_to_json(const EpsilonSchedule& e) {
    return json{{"start", e.start}, {"end", e.end}, {"frac", e.anneal_frac}};
}

EpsilonSchedule epsilon_from_json(const json& j) {
    EpsilonSchedule e;
    e.start = j.value("start", 1.0);
    e.end = j.value("end", 0.05);
    e.anneal_frac = j.value("frac", 0.2);
    return e;
}

}  // namespace

ExperimentConfig config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& ex) {
        throw std::invalid_argument(std::string("config parse error: ") + ex.what());
    }

    ExperimentConfig cfg;
    try {
        cfg.base.env = EnvSpec::parse(j.at("env").get<std::string>());
        cfg.base.episodes = j.value("episodes", std::uint64_t{100});
        cfg.base.alpha = j.value("alpha", 0.1);
        cfg.base.gamma = j.value("gamma", 0.99);
        if (j.contains("epsilon")) cfg.base.eps = epsilon_from_json(j.at("epsilon"));
        if (j.contains("max_steps"))
            cfg.base.max_steps_override = j.at("max_steps").get<std::uint32_t>();
        if (j.contains("fixed_layout_seed"))
            cfg.base.fixed_layout_seed = j.at("fixed_layout_seed").get<std::uint64_t>();
        cfg.base.record_steps = j.value("record_steps", true);

        const std::string reward = j.value("reward", std::string("gobi"));
        if (reward == "none") {
            cfg.base.intrinsic.reset();
        } else {
            GobiConfig g;
            g.kind = parse_reward_kind(reward);
            const std::string lifelong = j.value("lifelong", std::string("count"));
            if (lifelong == "count") g.lifelong = LifelongKind::Count;
            else if (lifelong == "re3") g.lifelong = LifelongKind::Re3;
            else throw std::invalid_argument("unknown lifelong bonus: " + lifelong);
            g.lambda0 = j.value("lambda0", 0.01);
            g.rho = j.value("rho", 0.0);
            g.expansion.k = j.value("k", 1);
            g.expansion.n = j.value("n", 1);
            const std::string mode = j.value("action_mode", std::string("enumerate"));
            if (mode == "enumerate") g.expansion.action_mode = ActionMode::EnumerateAll;
            else if (mode == "sample") g.expansion.action_mode = ActionMode::SampleRandom;
            else throw std::invalid_argument("unknown action_mode: " + mode);
            g.backend = parse_dynamics_backend(j.value("dynamics", std::string("oracle")));
            const std::string out_mode = j.value("output_mode", std::string("pano"));
            if (out_mode == "pano") g.output_mode = OutputMode::PanoOutput;
            else if (out_mode == "obs") g.output_mode = OutputMode::ObsOutput;
            else throw std::invalid_argument("unknown output_mode: " + out_mode);
            g.pretrain_steps = j.value("pretrain_steps", std::uint64_t{0});
            g.projection_seed = j.value("projection_seed", std::uint64_t{0});
            if (j.contains("re3")) {
                g.re3_embed_dim = j.at("re3").value("dim", 16);
                g.re3_k_nn = j.at("re3").value("knn", 3);
            }
            cfg.base.intrinsic = g;
        }

        cfg.seeds = j.value("seeds", std::vector<std::uint64_t>{1});
        cfg.out_dir = j.value("out", std::string("out"));
        if (j.contains("heatmaps"))
            for (const auto& r : j.at("heatmaps"))
                cfg.heatmap_ranges.emplace_back(r.at(0).get<std::uint64_t>(),
                                                r.at(1).get<std::uint64_t>());
        cfg.eval_episodes = j.value("eval_episodes", std::uint64_t{50});
        cfg.eval_seed = j.value("eval_seed", std::uint64_t{99});
    } catch (const json::exception& ex) {
        throw std::invalid_argument(std::string("config field error: ") + ex.what());
    }
    return cfg;
}

ExperimentConfig config_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json_text(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["env"] = cfg.base.env.id();
    j["episodes"] = cfg.base.episodes;
    j["alpha"] = cfg.base.alpha;
    j["gamma"] = cfg.base.gamma;
    j["epsilon"] = epsilon_to_json(cfg.base.eps);
    if (cfg.base.max_steps_override) j["max_steps"] = *cfg.base.max_steps_override;
    if (cfg.base.fixed_layout_seed) j["fixed_layout_seed"] = *cfg.base.fixed_layout_seed;
    j["record_steps"] = cfg.base.record_steps;
    if (!cfg.base.intrinsic) {
        j["reward"] = "none";
    } else {
        const GobiConfig& g = *cfg.base.intrinsic;
        j["reward"] = to_string(g.kind);
        j["lifelong"] = g.lifelong == LifelongKind::Count ? "count" : "re3";
        j["lambda0"] = g.lambda0;
        j["rho"] = g.rho;
        j["k"] = g.expansion.k;
        j["n"] = g.expansion.n;
        j["action_mode"] =
            g.expansion.action_mode == ActionMode::EnumerateAll ? "enumerate" : "sample";
        j["dynamics"] = to_string(g.backend);
        j["output_mode"] = g.output_mode == OutputMode::PanoOutput ? "pano" : "obs";
        j["pretrain_steps"] = g.pretrain_steps;
        j["projection_seed"] = g.projection_seed;
        j["re3"] = json{{"dim", g.re3_embed_dim}, {"knn", g.re3_k_nn}};
    }
    j["seeds"] = cfg.seeds;
    j["out"] = cfg.out_dir;
    if (!cfg.heatmap_ranges.empty()) {
        json hr = json::array();
        for (const auto& [a, b] : cfg.heatmap_ranges) hr.push_back(json::array({a, b}));
        j["heatmaps"] = hr;
    }
    j["eval_episodes"] = cfg.eval_episodes;
    j["eval_seed"] = cfg.eval_seed;
    return j.dump(2);
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    const std::string text = config_to_json(cfg);
    return exact_hash(std::span<const std::uint8_t>(
                          reinterpret_cast<const std::uint8_t*>(text.data()), text.size()))
        .value;
}

std::uint64_t Heatmap::max_count() const {
    std::uint64_t m = 0;
    for (std::uint64_t c : counts) m = std::max(m, c);
    return m;
}

Heatmap build_heatmap(const TrainConfig& config, std::span<const EpisodeLog> logs,
                      std::uint64_t first_episode, std::uint64_t last_episode) {
    if (first_episode < 1 || last_episode < first_episode)
        throw std::invalid_argument("build_heatmap: empty episode range");

    Heatmap map;
    bool replayed_any = false;
    for (const EpisodeLog& log : logs) {
        if (log.episode < first_episode || log.episode > last_episode) continue;
        GridEnv env = config.env.make(train_env_seed(config, log.episode));
        if (config.max_steps_override) env.max_steps = *config.max_steps_override;
        if (!replayed_any) {
            map.width = env.width;
            map.height = env.height;
            map.counts.assign(static_cast<std::size_t>(env.width) * env.height, 0);
            map.seen.assign(map.counts.size(), 0);
            replayed_any = true;
        }
        for (const Vec2i& c : visible_world_cells(env))
            map.seen[static_cast<std::size_t>(c.y) * map.width + c.x] = 1;
        for (const StepRecord& rec : log.steps) {
            const StepResult sr = step(env, rec.action);
            if (rec.obs_hash.value != 0 && hash_of(sr.obs) != rec.obs_hash)
                throw std::runtime_error("build_heatmap: log does not replay against the layout");
            map.counts[static_cast<std::size_t>(env.agent_pos.y) * map.width + env.agent_pos.x]++;
            for (const Vec2i& c : visible_world_cells(env))
                map.seen[static_cast<std::size_t>(c.y) * map.width + c.x] = 1;
        }
    }
    if (!replayed_any)
        throw std::invalid_argument("build_heatmap: no logged episodes in range");
    return map;
}

std::uint8_t heatmap_shade(std::uint64_t count, bool seen, std::uint64_t max_count) {
    if (count == 0) return seen ? 255 : 0;
    // visited cells darken with count, staying clear of the reserved shades
    const std::uint64_t m = std::max<std::uint64_t>(1, max_count);
    return static_cast<std::uint8_t>(230 - (166 * count) / m);
}

void write_heatmap_csv(const Heatmap& map, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            if (x) out << ',';
            out << map.count_at(x, y);
        }
        out << '\n';
    }
}

void write_heatmap_pgm(const Heatmap& map, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "P2\n" << map.width << ' ' << map.height << "\n255\n";
    const std::uint64_t m = map.max_count();
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            if (x) out << ' ';
            out << static_cast<int>(heatmap_shade(map.count_at(x, y), map.seen_at(x, y), m));
        }
        out << '\n';
    }
}

Heatmap read_heatmap_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    Heatmap map;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        int width = 0;
        while (std::getline(ss, field, ',')) {
            map.counts.push_back(std::strtoull(field.c_str(), nullptr, 10));
            ++width;
        }
        map.width = width;
        ++map.height;
    }
    map.seen.assign(map.counts.size(), 0);
    return map;
}

std::vector<std::uint8_t> read_pgm(const std::string& path, int& width, int& height) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string magic;
    int maxval = 0;
    in >> magic >> width >> height >> maxval;
    if (magic != "P2" || maxval != 255) throw std::runtime_error("unsupported pgm: " + path);
    std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width) * height);
    for (auto& p : pixels) {
        int v = 0;
        in >> v;
        p = static_cast<std::uint8_t>(v);
    }
    if (!in) throw std::runtime_error("truncated pgm: " + path);
    return pixels;
}

void write_step_csv(const std::string& path, std::span<const EpisodeLog> logs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << kStepCsvHeader << '\n';
    for (const EpisodeLog& log : logs) {
        std::uint64_t step_idx = 0;
        for (const StepRecord& rec : log.steps) {
            ++step_idx;
            out << log.episode << ',' << step_idx << ',' << (log.env_steps_before + step_idx)
                << ',' << fmt_double(rec.r_ext) << ',' << fmt_double(rec.r_int) << ','
                << fmt_double(rec.lambda) << ',' << rec.delta_m << ',' << rec.buffer_size << ','
                << (rec.success ? 1 : 0) << '\n';
        }
    }
}

void write_positions_csv(const std::string& path, std::span<const EpisodeLog> logs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "episode,step,action,x,y\n";
    for (const EpisodeLog& log : logs) {
        std::uint64_t step_idx = 0;
        for (const StepRecord& rec : log.steps) {
            ++step_idx;
            out << log.episode << ',' << step_idx << ',' << static_cast<int>(rec.action) << ','
                << rec.position.x << ',' << rec.position.y << '\n';
        }
    }
}

std::vector<EpisodeLog> read_positions_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<EpisodeLog> logs;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::uint64_t episode = 0, step_idx = 0;
        int action = 0, x = 0, y = 0;
        if (std::sscanf(line.c_str(), "%" SCNu64 ",%" SCNu64 ",%d,%d,%d", &episode, &step_idx,
                        &action, &x, &y) != 5)
            throw std::runtime_error("bad positions row in " + path);
        if (logs.empty() || logs.back().episode != episode) {
            EpisodeLog log;
            log.episode = episode;
            logs.push_back(std::move(log));
        }
        StepRecord rec;
        rec.action = static_cast<Action>(action);
        rec.position = {x, y};
        logs.back().steps.push_back(rec);
    }
    return logs;
}

std::vector<AggregateRow> aggregate_curves(const std::vector<std::vector<EpisodeLog>>& per_seed) {
    if (per_seed.empty()) return {};
    std::size_t episodes = per_seed.front().size();
    for (const auto& s : per_seed) episodes = std::min(episodes, s.size());

    std::vector<AggregateRow> rows;
    rows.reserve(episodes);
    const double n = static_cast<double>(per_seed.size());
    for (std::size_t e = 0; e < episodes; ++e) {
        AggregateRow row;
        row.episode = per_seed.front()[e].episode;
        double sum = 0.0, sum_sq = 0.0;
        for (const auto& s : per_seed) {
            const EpisodeLog& log = s[e];
            sum += log.ext_return;
            sum_sq += log.ext_return * log.ext_return;
            row.total_env_steps_mean +=
                static_cast<double>(log.env_steps_before + log.steps_used);
            row.success_mean += log.success ? 1.0 : 0.0;
        }
        row.return_mean = sum / n;
        const double var = std::max(0.0, sum_sq / n - row.return_mean * row.return_mean);
        row.return_std = std::sqrt(var);
        row.total_env_steps_mean /= n;
        row.success_mean /= n;
        rows.push_back(row);
    }
    return rows;
}

void write_aggregate_csv(const std::string& path, std::span<const AggregateRow> rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "episode,total_env_steps_mean,return_mean,return_std,success_mean\n";
    for (const AggregateRow& r : rows)
        out << r.episode << ',' << fmt_double(r.total_env_steps_mean) << ','
            << fmt_double(r.return_mean) << ',' << fmt_double(r.return_std) << ','
            << fmt_double(r.success_mean) << '\n';
}

std::size_t audit_intrinsic(std::span<const EpisodeLog> logs, RewardKind kind) {
    LifelongCount counts;
    std::size_t mismatches = 0;
    for (const EpisodeLog& log : logs) {
        for (const StepRecord& rec : log.steps) {
            const double lifelong = counts.bonus(rec.obs_hash);
            const double expected = combine_reward(kind, rec.delta_m, lifelong);
            if (expected != rec.r_int) ++mismatches;
        }
    }
    return mismatches;
}

void write_curve_svg(const std::string& path, std::span<const AggregateRow> rows,
                     const std::string& title) {
    if (rows.empty()) throw std::invalid_argument("write_curve_svg: no rows");
    const int w = 720, h = 420, ml = 60, mr = 20, mt = 40, mb = 50;
    double x_min = rows.front().total_env_steps_mean, x_max = x_min;
    double y_min = 0.0, y_max = 0.0;
    for (const AggregateRow& r : rows) {
        x_min = std::min(x_min, r.total_env_steps_mean);
        x_max = std::max(x_max, r.total_env_steps_mean);
        y_min = std::min(y_min, r.return_mean - r.return_std);
        y_max = std::max(y_max, r.return_mean + r.return_std);
    }
    if (x_max <= x_min) x_max = x_min + 1.0;
    if (y_max <= y_min) y_max = y_min + 1.0;
    const auto px = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * (w - ml - mr); };
    const auto py = [&](double y) { return h - mb - (y - y_min) / (y_max - y_min) * (h - mt - mb); };

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
    out << "<rect width='" << w << "' height='" << h << "' fill='white'/>\n";
    out << "<text x='" << w / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
        << "</text>\n";
    out << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << w - mr << "' y2='" << h - mb
        << "' stroke='black'/>\n";
    out << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << h - mb
        << "' stroke='black'/>\n";
    const auto polyline = [&](auto getter, const char* style) {
        out << "<polyline fill='none' " << style << " points='";
        for (const AggregateRow& r : rows) out << px(r.total_env_steps_mean) << ',' << py(getter(r)) << ' ';
        out << "'/>\n";
    };
    polyline([](const AggregateRow& r) { return r.return_mean + r.return_std; },
             "stroke='#9ecae1' stroke-width='1'");
    polyline([](const AggregateRow& r) { return r.return_mean - r.return_std; },
             "stroke='#9ecae1' stroke-width='1'");
    polyline([](const AggregateRow& r) { return r.return_mean; },
             "stroke='#2b6cb0' stroke-width='2'");
    out << "<text x='" << w / 2 << "' y='" << h - 14
        << "' text-anchor='middle' font-size='12'>environment steps</text>\n";
    out << "<text x='16' y='" << h / 2
        << "' font-size='12' transform='rotate(-90 16 " << h / 2 << ")'>return</text>\n";
    out << "</svg>\n";
}

PositionWorld random_position_world(std::mt19937_64& rng, int max_side) {
    PositionWorld world;
    world.width = 3 + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(max_side - 2)));
    world.height = 3 + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(max_side - 2)));
    world.walls.assign(static_cast<std::size_t>(world.width) * world.height, 0);
    for (auto& w : world.walls) w = uniform01(rng) < 0.25 ? 1 : 0;
    world.agent_pos = {static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(world.width))),
                       static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(world.height)))};
    world.set_wall(world.agent_pos.x, world.agent_pos.y, false);
    return world;
}

bool verify_oracle_equivalence(std::ostream& out, int n_position_worlds, int n_grid_states) {
    std::mt19937_64 rng(20240901);
    bool all_ok = true;

    std::size_t pw_checked = 0;
    bool pw_ok = true;
    for (int i = 0; i < n_position_worlds; ++i) {
        const PositionWorld world = random_position_world(rng);
        const OraclePositionDynamics model(world);
        for (int k = 1; k <= 3; ++k) {
            EpisodicBuffer buffer;
            expand_exhaustive(buffer, state_hash(world), ModelState{world.agent_pos}, model, k);
            pw_ok = pw_ok && buffer.codes() == bfs_reachable(world, k);
            ++pw_checked;
        }
    }
    out << (pw_ok ? "[PASS]" : "[FAIL]") << " position-world expansion == bfs ("
        << pw_checked << " checks)\n";
    all_ok = all_ok && pw_ok;

    std::size_t ge_checked = 0;
    bool ge_ok = true;
    const OracleGridDynamics grid_model;
    for (int i = 0; i < n_grid_states; ++i) {
        GridEnv env = i % 2 == 0 ? generate_multiroom(rng(), 2, 5) : generate_keycorridor(rng(), 3, 2);
        const int warmup = static_cast<int>(uniform_below(rng, 20));
        for (int t = 0; t < warmup && !env.episode_done; ++t)
            step(env, static_cast<Action>(uniform_below(rng, kNumActions)));
        if (env.episode_done) continue;
        for (int k = 1; k <= 3; ++k) {
            EpisodicBuffer buffer;
            expand_exhaustive(buffer, hash_of(observe(env)), ModelState{snapshot(env)}, grid_model,
                              k);
            ge_ok = ge_ok && buffer.codes() == bfs_reachable(env, k);
            ++ge_checked;
        }
    }
    out << (ge_ok ? "[PASS]" : "[FAIL]") << " grid-env expansion == bfs (" << ge_checked
        << " checks)\n";
    all_ok = all_ok && ge_ok;

    bool audit_ok = true;
    for (const RewardKind kind :
         {RewardKind::GoBI, RewardKind::R2_Indicator, RewardKind::R3_LifelongOnly}) {
        TrainConfig cfg;
        cfg.env = EnvSpec{EnvSpec::Family::MultiRoom, 2, 4};
        cfg.episodes = 25;
        cfg.seed = 17;
        GobiConfig g;
        g.kind = kind;
        g.expansion = {1, 1, ActionMode::EnumerateAll};
        cfg.intrinsic = g;
        const TrainResult result = train(cfg);
        audit_ok = audit_ok && audit_intrinsic(result.episodes, kind) == 0;
    }
    out << (audit_ok ? "[PASS]" : "[FAIL]") << " intrinsic reward audit (3 reward kinds)\n";
    all_ok = all_ok && audit_ok;

    return all_ok;
}

namespace {

struct SeedOutcome {
    std::uint64_t seed = 0;
    std::vector<EpisodeLog> episodes;  // step records cleared after files are written
    EvalResult eval;
    std::string error;
};

}  // namespace

int run(const ExperimentConfig& config, std::ostream& diag) {
    try {
        if (config.seeds.empty()) throw std::invalid_argument("run: seeds must be non-empty");
        for (std::size_t i = 0; i < config.seeds.size(); ++i)
            for (std::size_t j = i + 1; j < config.seeds.size(); ++j)
                if (config.seeds[i] == config.seeds[j])
                    throw std::invalid_argument("run: seeds must be distinct");
        if (config.out_dir.empty()) throw std::invalid_argument("run: output directory missing");
        for (const auto& [a, b] : config.heatmap_ranges)
            if (a < 1 || b < a || b > config.base.episodes)
                throw std::invalid_argument("run: heatmap range out of bounds");
        TrainConfig probe = config.base;
        probe.seed = config.seeds.front();
        validate(probe);
    } catch (const std::exception& ex) {
        diag << "config error: " << ex.what() << '\n';
        return 1;
    }

    try {
        fs::create_directories(config.out_dir);

        unsigned workers = std::thread::hardware_concurrency();
        if (const char* env = std::getenv("GOBI_THREADS")) {
            const long v = std::strtol(env, nullptr, 10);
            if (v >= 1) workers = static_cast<unsigned>(v);
        }
        workers = std::max(1u, std::min<unsigned>(workers, config.seeds.size()));

        std::vector<SeedOutcome> outcomes(config.seeds.size());
        std::atomic<std::size_t> next{0};
        const auto worker = [&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= config.seeds.size()) return;
                SeedOutcome& slot = outcomes[i];
                slot.seed = config.seeds[i];
                try {
                    TrainConfig tc = config.base;
                    tc.seed = slot.seed;
                    TrainResult result = train(tc);

                    const std::string stem =
                        config.out_dir + "/seed_" + std::to_string(slot.seed);
                    if (tc.record_steps) {
                        write_step_csv(stem + ".csv", result.episodes);
                        write_positions_csv(stem + "_positions.csv", result.episodes);
                        for (const auto& [a, b] : config.heatmap_ranges) {
                            const Heatmap map = build_heatmap(tc, result.episodes, a, b);
                            const std::string hstem = stem + "_heatmap_" + std::to_string(a) +
                                                      "-" + std::to_string(b);
                            write_heatmap_csv(map, hstem + ".csv");
                            write_heatmap_pgm(map, hstem + ".pgm");
                        }
                    }
                    slot.eval = evaluate(result.qtable, tc.env, config.eval_episodes,
                                         config.eval_seed, tc.max_steps_override,
                                         tc.fixed_layout_seed);
                    for (EpisodeLog& log : result.episodes) {
                        log.steps.clear();
                        log.steps.shrink_to_fit();
                    }
                    slot.episodes = std::move(result.episodes);
                } catch (const std::exception& ex) {
                    slot.error = ex.what();
                }
            }
        };

        std::vector<std::thread> pool;
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();

        for (const SeedOutcome& o : outcomes) {
            if (!o.error.empty()) {
                diag << "seed " << o.seed << " failed: " << o.error << '\n';
                return 2;
            }
        }

        std::vector<std::vector<EpisodeLog>> per_seed;
        per_seed.reserve(outcomes.size());
        for (SeedOutcome& o : outcomes) per_seed.push_back(std::move(o.episodes));
        const std::vector<AggregateRow> rows = aggregate_curves(per_seed);
        write_aggregate_csv(config.out_dir + "/aggregate.csv", rows);

        json manifest;
        manifest["version"] = kVersionString;
        char hash_hex[24];
        std::snprintf(hash_hex, sizeof hash_hex, "%016" PRIx64, config_hash(config));
        manifest["config_hash"] = hash_hex;
        manifest["config"] = json::parse(config_to_json(config));
        json seeds_summary = json::array();
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
            std::uint64_t first_success = 0;
            for (const EpisodeLog& log : per_seed[i])
                if (log.success) {
                    first_success = log.episode;
                    break;
                }
            seeds_summary.push_back(json{{"seed", outcomes[i].seed},
                                         {"first_success_episode", first_success},
                                         {"eval_success_rate", outcomes[i].eval.success_rate},
                                         {"eval_mean_return", outcomes[i].eval.mean_return}});
        }
        manifest["seeds"] = seeds_summary;
        std::ofstream mout(config.out_dir + "/manifest.json", std::ios::binary);
        if (!mout) throw std::runtime_error("cannot open manifest.json");
        mout << manifest.dump(2) << '\n';

        diag << "run complete: " << config.seeds.size() << " seeds -> " << config.out_dir << '\n';
        return 0;
    } catch (const std::exception& ex) {
        diag << "runtime failure: " << ex.what() << '\n';
        return 2;
    }
}

}  // namespace gobi
