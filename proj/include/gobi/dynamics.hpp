#ifndef GOBI_DYNAMICS_HPP
#define GOBI_DYNAMICS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "gobi/gridworld.hpp"
#include "gobi/hash.hpp"

namespace gobi {

// One random-policy transition: panorama hash of the pre-action state, the
// action, and the resulting observation and panorama.
struct TransitionRecord {
    HashCode pano_hash;
    Action action;
    Observation next_obs;
    Panorama next_pano;
};

struct TransitionDataset {
    std::vector<TransitionRecord> records;
    // Pre-action snapshots, parallel to records. Only captured on request
    // (oracle evaluation needs them); empty otherwise.
    std::vector<Snapshot> pre_states;
};

// Rollout-space state of a forward model. Oracle backends carry simulator
// state; tabular backends carry the panorama hash key.
using ModelState = std::variant<Snapshot, Vec2i, HashCode>;

struct ModelPrediction {
    HashCode obs_hash;                // hash of the predicted observation
    std::optional<Observation> obs;   // full observation when the backend has one
    std::optional<ModelState> next;   // successor state when the backend can chain
};

class ForwardModel {
public:
    virtual ~ForwardModel() = default;

    virtual int action_count() const = 0;

    // One-step prediction. Absence of a prediction is a value, not an error.
    virtual std::optional<ModelPrediction> predict(const ModelState& state, int action) const = 0;

    // Rollout state to use when scoring this model against record `idx` of
    // a dataset; nullopt when the dataset lacks what the backend needs.
    virtual std::optional<ModelState> eval_state(const TransitionDataset& ds, std::size_t idx) const = 0;
};

// Perfect forward model: restores the snapshot, applies the action in a
// copy of the true simulator, and never touches the live environment.
class OracleGridDynamics final : public ForwardModel {
public:
    int action_count() const override { return kNumActions; }
    std::optional<ModelPrediction> predict(const ModelState& state, int action) const override;
    std::optional<ModelState> eval_state(const TransitionDataset& ds, std::size_t idx) const override;
};

// Perfect forward model over a PositionWorld layout; rollout state is the
// agent position.
class OraclePositionDynamics final : public ForwardModel {
public:
    explicit OraclePositionDynamics(const PositionWorld& world) : world_(&world) {}

    int action_count() const override { return kNumMoves; }
    std::optional<ModelPrediction> predict(const ModelState& state, int action) const override;
    std::optional<ModelState> eval_state(const TransitionDataset&, std::size_t) const override {
        return std::nullopt;
    }

private:
    const PositionWorld* world_;
};

enum class OutputMode : std::uint8_t { ObsOutput = 0, PanoOutput = 1 };

// Frequency table keyed by (panorama hash, action). The prediction for a
// key is the modal candidate; ties break on the lowest candidate hash, so
// tables built from the same records in any order predict identically.
class TabularDynamics final : public ForwardModel {
public:
    TabularDynamics() = default;
    explicit TabularDynamics(OutputMode mode) : mode_(mode) {}

    void add(const TransitionRecord& rec);
    void add(std::span<const TransitionRecord> recs);

    int action_count() const override { return kNumActions; }
    std::optional<ModelPrediction> predict(const ModelState& state, int action) const override;
    std::optional<ModelState> eval_state(const TransitionDataset& ds, std::size_t idx) const override;

    OutputMode output_mode() const { return mode_; }
    bool chains() const { return mode_ == OutputMode::PanoOutput; }
    std::size_t key_count() const { return table_.size(); }

private:
    struct Key {
        std::uint64_t pano;
        std::uint8_t action;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const noexcept {
            return static_cast<std::size_t>(k.pano ^ (0x9e3779b97f4a7c15ULL * (k.action + 1)));
        }
    };
    struct Candidate {
        std::uint64_t count = 0;
        Observation obs;
        Panorama pano;  // stored only in PanoOutput mode
    };

    OutputMode mode_ = OutputMode::PanoOutput;
    std::unordered_map<Key, std::unordered_map<std::uint64_t, Candidate>, KeyHash> table_;
};

TabularDynamics train_tabular(std::span<const TransitionRecord> records, OutputMode mode);

using EnvGenerator = std::function<GridEnv(std::uint64_t seed)>;

// Uniform-random policy over freshly generated episodes (new layout seed
// per episode); exactly n_steps records.
TransitionDataset collect_random_transitions(const EnvGenerator& generator, std::uint64_t n_steps,
                                             std::uint64_t seed, bool keep_pre_states = false);

// Fraction of records whose prediction exists and matches next_obs exactly.
double eval_accuracy(const ForwardModel& model, const TransitionDataset& dataset);

// Flat binary dataset cache: magic, version, record count, fixed-width
// little-endian records.
void save_transitions(const std::string& path, std::span<const TransitionRecord> records);
std::vector<TransitionRecord> load_transitions(const std::string& path);

}  // namespace gobi

#endif
