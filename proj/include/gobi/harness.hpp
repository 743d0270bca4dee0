#ifndef GOBI_HARNESS_HPP
#define GOBI_HARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gobi/agent.hpp"

namespace gobi {

inline constexpr const char* kVersionString = "gobi 0.1.0";

// Fixed per-step CSV schema; a golden-file test pins this header.
inline constexpr const char* kStepCsvHeader =
    "episode,step,total_env_steps,r_ext,r_int,lambda,delta_m,buffer_size,success";

struct ExperimentConfig {
    TrainConfig base;  // per-seed template; seed is overwritten per worker
    std::vector<std::uint64_t> seeds;
    std::string out_dir;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> heatmap_ranges;  // 1-based inclusive
    std::uint64_t eval_episodes = 50;
    std::uint64_t eval_seed = 99;
};

// JSON round-trip used by the CLI and the manifest.
ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig config_from_json_file(const std::string& path);
std::string config_to_json(const ExperimentConfig& config);
std::uint64_t config_hash(const ExperimentConfig& config);

// Runs every seed (parallel workers capped by GOBI_THREADS), writes
// per-seed step and position CSVs, the aggregated curve CSV, heatmaps for
// the configured ranges, and a manifest. Returns 0 on success, 1 on a
// configuration error, 2 on a runtime failure.
int run(const ExperimentConfig& config, std::ostream& diag);

struct Heatmap {
    int width = 0;
    int height = 0;
    std::vector<std::uint64_t> counts;  // visits per cell, row-major
    std::vector<std::uint8_t> seen;     // 1 = appeared in some observation

    std::uint64_t count_at(int x, int y) const { return counts[static_cast<std::size_t>(y) * width + x]; }
    bool seen_at(int x, int y) const { return seen[static_cast<std::size_t>(y) * width + x] != 0; }
    std::uint64_t max_count() const;
};

// Replays the logged episodes (regenerating each layout from the training
// seed derivation) to accumulate visit counts and the seen mask.
// episode range is 1-based and inclusive; an empty range throws.
Heatmap build_heatmap(const TrainConfig& config, std::span<const EpisodeLog> logs,
                      std::uint64_t first_episode, std::uint64_t last_episode);

// Shade encoding: 0 = never seen, 255 = seen but not visited, visited
// cells darken with count (scaled by the maximum count).
std::uint8_t heatmap_shade(std::uint64_t count, bool seen, std::uint64_t max_count);

void write_heatmap_csv(const Heatmap& map, const std::string& path);
void write_heatmap_pgm(const Heatmap& map, const std::string& path);
Heatmap read_heatmap_csv(const std::string& path);
std::vector<std::uint8_t> read_pgm(const std::string& path, int& width, int& height);

void write_step_csv(const std::string& path, std::span<const EpisodeLog> logs);
void write_positions_csv(const std::string& path, std::span<const EpisodeLog> logs);
std::vector<EpisodeLog> read_positions_csv(const std::string& path);

struct AggregateRow {
    std::uint64_t episode = 0;
    double total_env_steps_mean = 0.0;
    double return_mean = 0.0;
    double return_std = 0.0;  // population std
    double success_mean = 0.0;
};

std::vector<AggregateRow> aggregate_curves(const std::vector<std::vector<EpisodeLog>>& per_seed);
void write_aggregate_csv(const std::string& path, std::span<const AggregateRow> rows);

// Replays a training log against a fresh lifelong-count state and
// recomputes every intrinsic reward from the logged delta_m; returns the
// number of mismatching steps (count-based lifelong bonuses only).
std::size_t audit_intrinsic(std::span<const EpisodeLog> logs, RewardKind kind);

// Simple SVG line plot of an aggregate curve (mean with +-std band).
void write_curve_svg(const std::string& path, std::span<const AggregateRow> rows,
                     const std::string& title);

// Random layouts for the oracle-equivalence checks.
PositionWorld random_position_world(std::mt19937_64& rng, int max_side = 10);

// Expansion-vs-BFS equivalence on random position worlds and grid states,
// plus a training-log audit; prints one line per check. Returns true when
// every check passes.
bool verify_oracle_equivalence(std::ostream& out, int n_position_worlds, int n_grid_states);

}  // namespace gobi

#endif
