// Experiment CLI: run multi-seed experiments, cache random-policy
// transition datasets, emit visitation heatmaps, plot learning curves,
// and verify the expansion oracle.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "gobi/harness.hpp"
#include "gobi/rng.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int cmd_run(const std::string& config_path, const std::string& env_id, const std::string& reward,
            const std::string& seeds_csv, std::int64_t episodes, const std::string& out_dir) {
    gobi::ExperimentConfig config;
    try {
        config = gobi::config_from_json_file(config_path);
        if (!env_id.empty()) config.base.env = gobi::EnvSpec::parse(env_id);
        if (!reward.empty()) {
            if (reward == "none") {
                config.base.intrinsic.reset();
            } else {
                if (!config.base.intrinsic) config.base.intrinsic = gobi::GobiConfig{};
                config.base.intrinsic->kind = gobi::parse_reward_kind(reward);
            }
        }
        if (!seeds_csv.empty()) {
            config.seeds.clear();
            std::stringstream ss(seeds_csv);
            std::string tok;
            while (std::getline(ss, tok, ',')) config.seeds.push_back(std::stoull(tok));
        }
        if (episodes > 0) config.base.episodes = static_cast<std::uint64_t>(episodes);
        if (!out_dir.empty()) config.out_dir = out_dir;
    } catch (const std::exception& ex) {
        std::cerr << "config error: " << ex.what() << '\n';
        return 1;
    }
    return gobi::run(config, std::cout);
}

int cmd_pretrain(const std::string& env_id, std::uint64_t steps, std::uint64_t seed,
                 const std::string& out_path) {
    gobi::EnvSpec spec;
    try {
        spec = gobi::EnvSpec::parse(env_id);
        if (steps < 1) throw std::invalid_argument("steps must be >= 1");
    } catch (const std::exception& ex) {
        std::cerr << "config error: " << ex.what() << '\n';
        return 1;
    }
    try {
        const gobi::TransitionDataset ds = gobi::collect_random_transitions(
            [&](std::uint64_t s) { return spec.make(s); }, steps, seed);
        gobi::save_transitions(out_path, ds.records);
        std::cout << "wrote " << ds.records.size() << " transitions to " << out_path << '\n';
        return 0;
    } catch (const std::exception& ex) {
        std::cerr << "runtime failure: " << ex.what() << '\n';
        return 2;
    }
}

int cmd_heatmap(const std::string& run_dir, std::uint64_t seed, std::uint64_t from,
                std::uint64_t to, std::string out_prefix) {
    gobi::ExperimentConfig config;
    try {
        std::ifstream in(run_dir + "/manifest.json");
        if (!in) throw std::invalid_argument("no manifest.json under " + run_dir);
        json manifest = json::parse(in);
        config = gobi::config_from_json_text(manifest.at("config").dump());
        if (seed == 0) seed = config.seeds.at(0);
        if (from < 1 || to < from) throw std::invalid_argument("bad episode range");
    } catch (const std::exception& ex) {
        std::cerr << "config error: " << ex.what() << '\n';
        return 1;
    }
    try {
        const std::string positions =
            run_dir + "/seed_" + std::to_string(seed) + "_positions.csv";
        const std::vector<gobi::EpisodeLog> logs = gobi::read_positions_csv(positions);
        gobi::TrainConfig tc = config.base;
        tc.seed = seed;
        const gobi::Heatmap map = gobi::build_heatmap(tc, logs, from, to);
        if (out_prefix.empty())
            out_prefix = run_dir + "/heatmap_" + std::to_string(seed) + "_" +
                         std::to_string(from) + "-" + std::to_string(to);
        gobi::write_heatmap_csv(map, out_prefix + ".csv");
        gobi::write_heatmap_pgm(map, out_prefix + ".pgm");
        std::cout << "wrote " << out_prefix << ".csv and .pgm\n";
        return 0;
    } catch (const std::invalid_argument& ex) {
        std::cerr << "config error: " << ex.what() << '\n';
        return 1;
    } catch (const std::exception& ex) {
        std::cerr << "runtime failure: " << ex.what() << '\n';
        return 2;
    }
}

int cmd_plot(const std::string& run_dir, std::string out_path) {
    try {
        const std::string agg = run_dir + "/aggregate.csv";
        std::ifstream in(agg);
        if (!in) {
            std::cerr << "config error: cannot open " << agg << '\n';
            return 1;
        }
        std::vector<gobi::AggregateRow> rows;
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            gobi::AggregateRow r;
            if (std::sscanf(line.c_str(), "%lu,%lf,%lf,%lf,%lf", &r.episode,
                            &r.total_env_steps_mean, &r.return_mean, &r.return_std,
                            &r.success_mean) == 5)
                rows.push_back(r);
        }
        if (out_path.empty()) out_path = run_dir + "/curve.svg";
        gobi::write_curve_svg(out_path, rows, "mean return vs environment steps");
        std::cout << "wrote " << out_path << '\n';
        return 0;
    } catch (const std::exception& ex) {
        std::cerr << "runtime failure: " << ex.what() << '\n';
        return 2;
    }
}

int cmd_verify(bool deep) {
    const int worlds = deep ? 100 : 30;
    const int states = deep ? 100 : 20;
    const bool ok = gobi::verify_oracle_equivalence(std::cout, worlds, states);
    std::cout << (ok ? "verification passed\n" : "verification FAILED\n");
    return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"episodic reachability-expansion intrinsic reward experiments"};
    app.require_subcommand(1);

    std::string config_path, env_id, reward, seeds_csv, out_dir;
    std::int64_t episodes = -1;
    auto* run_cmd = app.add_subcommand("run", "run a multi-seed experiment");
    run_cmd->add_option("--config", config_path, "experiment config (json)")->required();
    run_cmd->add_option("--env", env_id, "override environment id");
    run_cmd->add_option("--reward", reward, "override reward kind (gobi|r1|r2|r3|none)");
    run_cmd->add_option("--seeds", seeds_csv, "override seeds, comma separated");
    run_cmd->add_option("--episodes", episodes, "override episode budget");
    run_cmd->add_option("--out", out_dir, "override output directory");

    std::string pre_env, pre_out = "transitions.bin";
    std::uint64_t pre_steps = 100000, pre_seed = 1;
    auto* pre_cmd = app.add_subcommand("pretrain", "collect and cache random-policy transitions");
    pre_cmd->add_option("--env", pre_env, "environment id")->required();
    pre_cmd->add_option("--steps", pre_steps, "number of random steps");
    pre_cmd->add_option("--seed", pre_seed, "collection seed");
    pre_cmd->add_option("--out", pre_out, "output dataset path");

    std::string hm_run, hm_out;
    std::uint64_t hm_seed = 0, hm_from = 1, hm_to = 1;
    auto* hm_cmd = app.add_subcommand("heatmap", "emit a visitation heatmap from a finished run");
    hm_cmd->add_option("--run", hm_run, "run directory")->required();
    hm_cmd->add_option("--seed", hm_seed, "seed to plot (default: first)");
    hm_cmd->add_option("--from", hm_from, "first episode (1-based)");
    hm_cmd->add_option("--to", hm_to, "last episode (inclusive)");
    hm_cmd->add_option("--out", hm_out, "output path prefix");

    std::string plot_run, plot_out;
    auto* plot_cmd = app.add_subcommand("plot", "render the aggregate curve as svg");
    plot_cmd->add_option("--run", plot_run, "run directory")->required();
    plot_cmd->add_option("--out", plot_out, "output svg path");

    bool deep = false;
    auto* verify_cmd = app.add_subcommand("verify", "run the expansion-vs-bfs oracle suite");
    verify_cmd->add_flag("--deep", deep, "full-size verification");

    CLI11_PARSE(app, argc, argv);

    if (run_cmd->parsed()) return cmd_run(config_path, env_id, reward, seeds_csv, episodes, out_dir);
    if (pre_cmd->parsed()) return cmd_pretrain(pre_env, pre_steps, pre_seed, pre_out);
    if (hm_cmd->parsed()) return cmd_heatmap(hm_run, hm_seed, hm_from, hm_to, hm_out);
    if (plot_cmd->parsed()) return cmd_plot(plot_run, plot_out);
    if (verify_cmd->parsed()) return cmd_verify(deep);
    return 1;
}
