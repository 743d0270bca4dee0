#ifndef GOBI_REACHABILITY_HPP
#define GOBI_REACHABILITY_HPP

#include <cstdint>
#include <random>
#include <unordered_set>

#include "gobi/dynamics.hpp"

namespace gobi {

// Per-episode set of hash codes of visited and predicted-reachable states.
// Size never decreases between resets; cleared exactly at episode start.
class EpisodicBuffer {
public:
    bool insert(HashCode h) {
        ++insertions_;
        return codes_.insert(h.value).second;
    }
    bool contains(HashCode h) const { return codes_.contains(h.value); }
    std::size_t size() const { return codes_.size(); }
    std::uint64_t insertions() const { return insertions_; }
    void reset() {
        codes_.clear();
        insertions_ = 0;
    }
    const std::unordered_set<std::uint64_t>& codes() const { return codes_; }

private:
    std::unordered_set<std::uint64_t> codes_;
    std::uint64_t insertions_ = 0;
};

enum class ActionMode : std::uint8_t { EnumerateAll = 0, SampleRandom = 1 };

struct ExpansionConfig {
    int k = 1;  // forward prediction steps
    int n = 1;  // rollouts per step (SampleRandom)
    ActionMode action_mode = ActionMode::EnumerateAll;
};

// One expansion round at the current state: inserts the current observation
// hash, then prediction hashes per the action mode. EnumerateAll covers
// every action at k=1 (k>1 throws; use SampleRandom). SampleRandom runs n
// independent chained rollouts of length k, each aborting early when the
// model returns no prediction or cannot chain. Returns the buffer growth.
// The real next observation is not inserted here; it arrives as
// current_obs_hash on the next call.
int expand(EpisodicBuffer& buffer, HashCode current_obs_hash, const ModelState& context,
           const ForwardModel& model, const ExpansionConfig& config, std::mt19937_64& rng);

// Exact expansion over every action sequence of length <= k, used by the
// oracle verification paths. Cost grows as action_count^k; requires a
// backend that chains (oracle, or tabular in panorama-output mode).
int expand_exhaustive(EpisodicBuffer& buffer, HashCode current_obs_hash, const ModelState& context,
                      const ForwardModel& model, int k);

// Hashes of the observations at every true environment state within k steps
// of the given state (depth 0 included), by breadth-first search over the
// real simulator. Throws when the visited-state cap is exceeded.
std::unordered_set<std::uint64_t> bfs_reachable(const GridEnv& state, int k,
                                                std::size_t max_states = 200000);
std::unordered_set<std::uint64_t> bfs_reachable(const PositionWorld& state, int k,
                                                std::size_t max_states = 200000);

}  // namespace gobi

#endif
