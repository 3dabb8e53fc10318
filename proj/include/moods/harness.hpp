#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "moods/dataset.hpp"
#include "moods/metrics.hpp"
#include "moods/model.hpp"
#include "moods/sampler.hpp"

namespace moods {

enum class Method { none, smote, svm_smote, moods };

const char* to_string(Method m);
/// Accepts none, smote, svm_smote (or svm-smote) and moods.
Method parse_method(const std::string& name);

struct ExperimentConfig {
    std::filesystem::path dataset;  // manifest path
    Method method = Method::moods;
    int n_runs = 5;
    std::uint64_t base_seed = 0;
    SplitFractions fractions;
    MoodsConfig moods;  // carries the trainer and SVM-SMOTE settings for every method
    int hist_bins = 20;
    std::filesystem::path out;  // empty: nothing is written

    void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Missing keys keep their defaults. A relative dataset path is resolved against `base_dir`.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct RunResult {
    int run = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;

    F1Report test;           // final model on the test part
    F1Report baseline_test;  // model trained on the raw training part
    DiversificationReport diversification;
    std::vector<StepRecord> trace;  // empty unless method = moods
    std::optional<StopReason> stop;
    double duration_seconds = 0;    // not written to any output file

    Dataset train;      // standardized training part
    Dataset resampled;  // set the final model was trained on
    std::vector<std::string> provenance;
    ModelState baseline;
    ModelState final_model;
};

nlohmann::json to_json(const RunResult& r);

struct Aggregate {
    double mean = 0;
    double variance = 0;  // sample variance over successful runs
};

struct ExperimentSummary {
    ExperimentConfig config;
    std::string dataset_name;
    std::vector<RunResult> runs;
    int failed = 0;
    Aggregate f1, f1_minority, f1_majority;
    Aggregate baseline_f1;
    Aggregate overlap_decrease, var_order_avg, balance;
};

nlohmann::json to_json(const ExperimentSummary& s);

/// One run of the configured method with seed base_seed + run_index.
RunResult run_single(const Dataset& data, const ExperimentConfig& cfg, int run_index);

/// Runs every seed, folds the results and, when cfg.out is set, writes
/// summary.json, run_<i>.json, trace_<i>.csv, hist_<model>_<i>.csv,
/// final_set_<i>.csv and checkpoints under cfg.out.
ExperimentSummary run_experiment(const ExperimentConfig& cfg);

ExperimentSummary summarize(const ExperimentConfig& cfg, std::string dataset_name, std::vector<RunResult> runs);

struct ComparisonRow {
    Method method = Method::none;
    int runs = 0;
    int failed = 0;
    double f1 = 0, f1_minority = 0, f1_majority = 0;
    double overlap_decrease = 0;
    double var_order_avg = 0;
};

std::vector<ComparisonRow> comparison_rows(const std::vector<ExperimentSummary>& summaries);

/// Runs each config and tabulates the means. All configs must share dataset,
/// split fractions, seed and run count. Writes comparison.csv and
/// comparison.txt into `out` when it is non-empty.
std::vector<ComparisonRow> compare_methods(const std::vector<ExperimentConfig>& cfgs,
                                           const std::filesystem::path& out = {});

std::string comparison_csv(const std::vector<ComparisonRow>& rows);
std::string comparison_text(const std::vector<ComparisonRow>& rows);

/// Writes hist_baseline_<i>.csv, hist_final_<i>.csv and, for MOODS runs, trace_<i>.csv.
void export_figures(const RunResult& r, const std::filesystem::path& out, int bins = 20);

/// Rebuilds figure data from an experiment directory written by run_experiment,
/// reloading the saved checkpoints and resampled sets. Returns the files written.
std::vector<std::filesystem::path> export_from_directory(const std::filesystem::path& run_dir,
                                                         const std::filesystem::path& out);

}  // namespace moods
