#include "gobi/dynamics.hpp"

#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

#include "gobi/rng.hpp"

namespace gobi {

std::optional<ModelPrediction> OracleGridDynamics::predict(const ModelState& state,
                                                           int action) const {
    const Snapshot* snap = std::get_if<Snapshot>(&state);
    if (!snap || snap->state.episode_done) return std::nullopt;
    if (action < 0 || action >= kNumActions) return std::nullopt;
    GridEnv env = restore(*snap);
    const StepResult sr = step(env, static_cast<Action>(action));
    ModelPrediction pred;
    pred.obs_hash = hash_of(sr.obs);
    pred.obs = sr.obs;
    pred.next = ModelState{Snapshot{std::move(env)}};
    return pred;
}

std::optional<ModelState> OracleGridDynamics::eval_state(const TransitionDataset& ds,
                                                         std::size_t idx) const {
    if (idx >= ds.pre_states.size()) return std::nullopt;
    return ModelState{ds.pre_states[idx]};
}

std::optional<ModelPrediction> OraclePositionDynamics::predict(const ModelState& state,
                                                               int action) const {
    const Vec2i* pos = std::get_if<Vec2i>(&state);
    if (!pos) return std::nullopt;
    if (action < 0 || action >= kNumMoves) return std::nullopt;
    const Vec2i next = moved_position(*world_, *pos, action);
    ModelPrediction pred;
    pred.obs_hash = position_hash(next);
    pred.next = ModelState{next};
    return pred;
}

void TabularDynamics::add(const TransitionRecord& rec) {
    const Key key{rec.pano_hash.value, static_cast<std::uint8_t>(rec.action)};
    std::uint64_t cand_id;
    if (mode_ == OutputMode::ObsOutput) {
        cand_id = hash_of(rec.next_obs).value;
    } else {
        // candidate identity covers the panorama too, so chaining stays
        // consistent with the stored observation
        std::array<std::uint8_t, 5 * Observation::kBytes> bytes;
        std::memcpy(bytes.data(), rec.next_obs.values.data(), Observation::kBytes);
        for (int i = 0; i < 4; ++i)
            std::memcpy(bytes.data() + (i + 1) * Observation::kBytes,
                        rec.next_pano.views[i].values.data(), Observation::kBytes);
        cand_id = exact_hash(std::span<const std::uint8_t>(bytes.data(), bytes.size())).value;
    }
    Candidate& cand = table_[key][cand_id];
    if (cand.count == 0) {
        cand.obs = rec.next_obs;
        if (mode_ == OutputMode::PanoOutput) cand.pano = rec.next_pano;
    }
    cand.count += 1;
}

void TabularDynamics::add(std::span<const TransitionRecord> recs) {
    for (const TransitionRecord& r : recs) add(r);
}

std::optional<ModelPrediction> TabularDynamics::predict(const ModelState& state,
                                                        int action) const {
    const HashCode* key_hash = std::get_if<HashCode>(&state);
    if (!key_hash) return std::nullopt;
    const auto it = table_.find(Key{key_hash->value, static_cast<std::uint8_t>(action)});
    if (it == table_.end()) return std::nullopt;

    const Candidate* best = nullptr;
    std::uint64_t best_id = 0;
    for (const auto& [id, cand] : it->second) {
        if (!best || cand.count > best->count || (cand.count == best->count && id < best_id)) {
            best = &cand;
            best_id = id;
        }
    }
    ModelPrediction pred;
    pred.obs_hash = hash_of(best->obs);
    pred.obs = best->obs;
    if (mode_ == OutputMode::PanoOutput) pred.next = ModelState{hash_of(best->pano)};
    return pred;
}

std::optional<ModelState> TabularDynamics::eval_state(const TransitionDataset& ds,
                                                      std::size_t idx) const {
    return ModelState{ds.records[idx].pano_hash};
}

TabularDynamics train_tabular(std::span<const TransitionRecord> records, OutputMode mode) {
    if (records.empty()) throw std::invalid_argument("train_tabular: no records");
    TabularDynamics model(mode);
    model.add(records);
    return model;
}

TransitionDataset collect_random_transitions(const EnvGenerator& generator, std::uint64_t n_steps,
                                             std::uint64_t seed, bool keep_pre_states) {
    if (n_steps < 1) throw std::invalid_argument("collect_random_transitions: n_steps must be >= 1");
    std::mt19937_64 rng(mix_seed(seed, 0xc011));
    TransitionDataset ds;
    ds.records.reserve(n_steps);

    GridEnv env;
    bool have_env = false;
    std::uint64_t episode = 0;
    for (std::uint64_t i = 0; i < n_steps; ++i) {
        if (!have_env || env.episode_done) {
            env = generator(mix_seed(seed, ++episode));
            have_env = true;
        }
        const Panorama pano = panorama(env);
        if (keep_pre_states) ds.pre_states.push_back(snapshot(env));
        const Action a = static_cast<Action>(uniform_below(rng, kNumActions));
        const StepResult sr = step(env, a);
        ds.records.push_back({hash_of(pano), a, sr.obs, panorama(env)});
    }
    return ds;
}

double eval_accuracy(const ForwardModel& model, const TransitionDataset& dataset) {
    if (dataset.records.empty()) throw std::invalid_argument("eval_accuracy: empty held-out set");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        const auto state = model.eval_state(dataset, i);
        if (!state) continue;
        const auto pred = model.predict(*state, static_cast<int>(dataset.records[i].action));
        if (pred && pred->obs && *pred->obs == dataset.records[i].next_obs) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(dataset.records.size());
}

namespace {

constexpr char kMagic[8] = {'G', 'O', 'B', 'I', 'T', 'R', 'N', 'S'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kRecordBytes = 8 + 1 + Observation::kBytes + 4 * Observation::kBytes;

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FileHandle = std::unique_ptr<std::FILE, FileCloser>;

void put_u32(std::uint8_t* p, std::uint32_t v) {
    p[0] = static_cast<std::uint8_t>(v);
    p[1] = static_cast<std::uint8_t>(v >> 8);
    p[2] = static_cast<std::uint8_t>(v >> 16);
    p[3] = static_cast<std::uint8_t>(v >> 24);
}

void put_u64(std::uint8_t* p, std::uint64_t v) {
    put_u32(p, static_cast<std::uint32_t>(v));
    put_u32(p + 4, static_cast<std::uint32_t>(v >> 32));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint64_t get_u64(const std::uint8_t* p) {
    return static_cast<std::uint64_t>(get_u32(p)) | (static_cast<std::uint64_t>(get_u32(p + 4)) << 32);
}

}  // namespace

void save_transitions(const std::string& path, std::span<const TransitionRecord> records) {
    FileHandle f(std::fopen(path.c_str(), "wb"));
    if (!f) throw std::runtime_error("save_transitions: cannot open " + path);

    std::uint8_t header[20];
    std::memcpy(header, kMagic, 8);
    put_u32(header + 8, kVersion);
    put_u64(header + 12, records.size());
    if (std::fwrite(header, 1, sizeof header, f.get()) != sizeof header)
        throw std::runtime_error("save_transitions: write failed");

    std::vector<std::uint8_t> buf(kRecordBytes);
    for (const TransitionRecord& r : records) {
        put_u64(buf.data(), r.pano_hash.value);
        buf[8] = static_cast<std::uint8_t>(r.action);
        std::memcpy(buf.data() + 9, r.next_obs.values.data(), Observation::kBytes);
        for (int i = 0; i < 4; ++i)
            std::memcpy(buf.data() + 9 + (i + 1) * Observation::kBytes,
                        r.next_pano.views[i].values.data(), Observation::kBytes);
        if (std::fwrite(buf.data(), 1, buf.size(), f.get()) != buf.size())
            throw std::runtime_error("save_transitions: write failed");
    }
}

std::vector<TransitionRecord> load_transitions(const std::string& path) {
    FileHandle f(std::fopen(path.c_str(), "rb"));
    if (!f) throw std::runtime_error("load_transitions: cannot open " + path);

    std::uint8_t header[20];
    if (std::fread(header, 1, sizeof header, f.get()) != sizeof header)
        throw std::runtime_error("load_transitions: truncated header in " + path);
    if (std::memcmp(header, kMagic, 8) != 0)
        throw std::runtime_error("load_transitions: bad magic in " + path);
    if (get_u32(header + 8) != kVersion)
        throw std::runtime_error("load_transitions: unsupported version in " + path);

    const std::uint64_t count = get_u64(header + 12);
    std::vector<TransitionRecord> records;
    records.reserve(count);
    std::vector<std::uint8_t> buf(kRecordBytes);
    for (std::uint64_t i = 0; i < count; ++i) {
        if (std::fread(buf.data(), 1, buf.size(), f.get()) != buf.size())
            throw std::runtime_error("load_transitions: truncated record in " + path);
        TransitionRecord r;
        r.pano_hash = HashCode{get_u64(buf.data())};
        r.action = static_cast<Action>(buf[8]);
        std::memcpy(r.next_obs.values.data(), buf.data() + 9, Observation::kBytes);
        for (int j = 0; j < 4; ++j)
            std::memcpy(r.next_pano.views[j].values.data(),
                        buf.data() + 9 + (j + 1) * Observation::kBytes, Observation::kBytes);
        records.push_back(r);
    }
    return records;
}

}  // namespace gobi
