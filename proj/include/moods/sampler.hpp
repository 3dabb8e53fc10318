#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "moods/dataset.hpp"
#include "moods/metrics.hpp"
#include "moods/model.hpp"
#include "moods/oversample.hpp"

namespace moods {

struct MoodsConfig {
    int max_iter = 200;  // total outer iterations, accepted or rejected
    int patience = 20;   // consecutive rejections before stopping
    TrainConfig train;
    SmoteConfig smote;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Outer-loop state. The current sample is all training minority points,
/// the accepted synthetic points and the accepted majority points.
struct SamplerState {
    std::shared_ptr<const Dataset> source;  // training part
    std::vector<std::size_t> minority_index;
    std::vector<std::size_t> majority_taken;  // in acceptance order
    std::vector<LabeledPoint> synthetic;
    std::vector<std::size_t> pool;            // remaining majority indices
    std::vector<double> weight;               // draw weight p, parallel to pool
    std::size_t draw_size = 1;                // M_k
    double best_f1 = 0;
    double best_f1_minority = 0;
    std::size_t accepted = 0;
    std::size_t rejection_streak = 0;
    std::size_t iteration = 0;
    std::uint64_t seed = 0;
    std::uint64_t init_seed = 0;
    ModelState model;  // trained on the current sample

    Dataset sample() const;
    /// Source index of every point of sample(), -1 for synthetic points.
    std::vector<std::ptrdiff_t> origin() const;
    std::vector<std::string> provenance() const;
};

enum class Decision { initial, accepted, rejected };
const char* to_string(Decision d);

struct StepRecord {
    std::size_t step = 0;
    Decision decision = Decision::initial;
    double one_minus_f1 = 1;
    double one_minus_f1_minority = 1;
    std::size_t sample_size = 0;  // size of the proposed S_k
    std::size_t draw_size = 0;    // M_k
    std::size_t n_synthetic = 0;  // synthetic points generated for S_k
};

struct Candidate {
    Dataset sample;                    // S_{k-1} u S_{M_k} u synthetic
    std::vector<std::size_t> drawn;    // pool positions of S_{M_k}
    std::vector<LabeledPoint> synthetic;
};

struct Evaluation {
    F1Report validation;
    ModelState model;
};

enum class StopReason { max_iter, patience, pool_exhausted };
const char* to_string(StopReason r);

struct MoodsResult {
    Dataset sample;
    std::vector<std::string> provenance;
    ModelState model;
    std::vector<StepRecord> trace;
    SamplerState state;
    StopReason stop = StopReason::max_iter;
};

/// Builds S_0 from all minority points plus ceil(|minority| / 2) uniformly
/// drawn majority points and scores it with one full training run.
SamplerState initialize(const Dataset& train, const Dataset& validation, const MoodsConfig& cfg);

/// Normalizes the pool weights and draws `count` distinct pool positions
/// with probability proportional to weight. Throws DrawExhausted when the
/// pool holds fewer than `count` points of positive weight.
std::vector<std::size_t> weighted_majority_draw(SamplerState& state, std::size_t count, std::uint64_t stream);

/// Synthetic count topping the candidate minority up to its majority count.
std::size_t synthetic_top_up(std::size_t minority, std::size_t majority_so_far, std::size_t draw);

Candidate propose(SamplerState& state, const MoodsConfig& cfg);

/// Trains a freshly initialised model on `candidate` and scores it on `validation`.
Evaluation evaluate(const Dataset& candidate, const Dataset& validation, const MoodsConfig& cfg,
                    std::uint64_t init_seed);

StepRecord step(SamplerState& state, const Dataset& validation, const MoodsConfig& cfg);

/// Applies the accept/reject rule to an evaluated candidate.
StepRecord decide(SamplerState& state, Candidate candidate, Evaluation eval);

MoodsResult run(const DataSplit& split, const MoodsConfig& cfg);

/// CSV columns: step,decision,one_minus_f1,one_minus_f1_minority,sample_size,draw_size,n_synthetic.
std::string trace_csv(const std::vector<StepRecord>& trace);
void write_trace_csv(const std::vector<StepRecord>& trace, const std::filesystem::path& path);
std::vector<StepRecord> read_trace_csv(const std::filesystem::path& path);

}  // namespace moods
