#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "moods/error.hpp"
#include "moods/harness.hpp"
#include "support.hpp"

using namespace moods;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t line_count(const fs::path& p) {
    const auto text = slurp(p);
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

// Writes a small blob dataset plus manifest into a fresh directory.
fs::path toy_manifest(const fs::path& dir) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    save_csv(testing::blobs(15, 85, 1.8, 1.0, 12), dir / "toy.csv");
    std::ofstream(dir / "toy.json") << R"({"name": "toy", "path": "toy.csv", "label_column": "label",
                                          "minority_label": "1", "has_header": true})";
    return dir / "toy.json";
}

ExperimentConfig quick(const fs::path& manifest, Method method) {
    ExperimentConfig cfg;
    cfg.dataset = manifest;
    cfg.method = method;
    cfg.n_runs = 2;
    cfg.base_seed = 10;
    cfg.moods.train.max_epochs = 20;
    cfg.moods.train.learning_rate = 1e-3;
    cfg.moods.max_iter = 8;
    cfg.moods.patience = 4;
    return cfg;
}

}  // namespace

TEST_CASE("method names") {
    CHECK(parse_method("none") == Method::none);
    CHECK(parse_method("svm-smote") == Method::svm_smote);
    CHECK(std::string(to_string(Method::svm_smote)) == "svm_smote");
    CHECK_THROWS_AS(parse_method("gan"), ArgumentError);
}

TEST_CASE("experiment config JSON round-trip and partial files") {
    ExperimentConfig cfg;
    cfg.dataset = "data/ecoli.json";
    cfg.method = Method::smote;
    cfg.n_runs = 3;
    cfg.base_seed = 9;
    cfg.moods.train.max_epochs = 17;
    cfg.moods.smote.k_neighbors = 3;
    cfg.moods.patience = 6;
    const auto back = experiment_config_from_json(to_json(cfg));
    CHECK(to_json(back) == to_json(cfg));

    const auto partial = experiment_config_from_json(nlohmann::json::parse(R"({"dataset": "x.json", "runs": 2})"), "/base");
    CHECK(partial.dataset == fs::path("/base/x.json"));
    CHECK(partial.n_runs == 2);
    CHECK(partial.method == Method::moods);
    CHECK(partial.moods.train.learning_rate == 1e-4);
    CHECK_THROWS_AS(experiment_config_from_json(nlohmann::json::parse(R"({"runs": "many"})")), ArgumentError);
    ExperimentConfig bad = cfg;
    bad.n_runs = 0;
    CHECK_THROWS_AS(bad.validate(), ArgumentError);
}

TEST_CASE("method none is a self-comparison") {
    const auto manifest = toy_manifest(fs::temp_directory_path() / "moods_h_none");
    const auto data = load_dataset(load_manifest(manifest));
    const auto r = run_single(data, quick(manifest, Method::none), 0);
    REQUIRE(r.ok);
    CHECK(r.resampled == r.train);
    CHECK(r.diversification.overlap_decrease == 0);
    CHECK(r.diversification.var_order_avg == 0);
    CHECK(r.test.f1 == r.baseline_test.f1);
}

TEST_CASE("oversampling methods balance the training part") {
    const auto manifest = toy_manifest(fs::temp_directory_path() / "moods_h_smote");
    const auto data = load_dataset(load_manifest(manifest));
    for (auto m : {Method::smote, Method::svm_smote}) {
        const auto r = run_single(data, quick(manifest, m), 1);
        REQUIRE(r.ok);
        CHECK(r.resampled.minority_count() == r.resampled.majority_count());
        CHECK(r.resampled.majority_count() == r.train.majority_count());
        CHECK(r.diversification.balance == 0.5);
    }
}

TEST_CASE("failed runs are recorded and the rest proceed") {
    const auto manifest = toy_manifest(fs::temp_directory_path() / "moods_h_fail");
    auto cfg = quick(manifest, Method::smote);
    cfg.fractions = {0.2, 0.4, 0.4};  // every split is rejected
    const auto s = run_experiment(cfg);
    CHECK(s.runs.size() == 2);
    CHECK(s.failed == 2);
    CHECK_FALSE(s.runs[0].ok);
    CHECK_FALSE(s.runs[0].error.empty());
}

TEST_CASE("experiment outputs, determinism and re-export") {
    const auto dir = fs::temp_directory_path() / "moods_h_run";
    const auto manifest = toy_manifest(dir / "data");
    auto cfg = quick(manifest, Method::moods);
    cfg.out = dir / "a";
    const auto s = run_experiment(cfg);
    CHECK(s.failed == 0);
    for (const char* f : {"summary.json", "run_0.json", "run_1.json", "trace_0.csv", "hist_baseline_0.csv",
                          "hist_final_1.csv", "final_set_0.csv", "model_final_1.json", "model_final_1.bin"}) {
        CAPTURE(f);
        CHECK(fs::exists(cfg.out / f));
    }
    // Histogram rows: one per point of the set each model was trained on.
    CHECK(line_count(cfg.out / "hist_baseline_0.csv") == s.runs[0].train.size() + 1);
    CHECK(line_count(cfg.out / "hist_final_0.csv") == s.runs[0].resampled.size() + 1);

    // Accepted trace rows are monotone in both objectives.
    const auto trace = read_trace_csv(cfg.out / "trace_0.csv");
    double f1 = 2, f1m = 2;
    for (const auto& r : trace) {
        if (r.decision == Decision::rejected) continue;
        CHECK(r.one_minus_f1 < f1);
        CHECK(r.one_minus_f1_minority < f1m);
        f1 = r.one_minus_f1;
        f1m = r.one_minus_f1_minority;
    }

    // Summary is a fold of the per-run reports.
    const auto summary = nlohmann::json::parse(slurp(cfg.out / "summary.json"));
    double mean = 0;
    for (int i = 0; i < 2; ++i) {
        mean += nlohmann::json::parse(slurp(cfg.out / ("run_" + std::to_string(i) + ".json")))["test"]["f1"].get<double>();
    }
    CHECK(summary["test_f1"]["mean"].get<double>() == doctest::Approx(mean / 2).epsilon(1e-15));

    // Byte-identical second invocation.
    auto again = cfg;
    again.out = dir / "b";
    run_experiment(again);
    for (const auto& entry : fs::directory_iterator(cfg.out)) {
        const auto name = entry.path().filename();
        CAPTURE(name.string());
        CHECK(slurp(entry.path()) == slurp(again.out / name));
    }

    // Rebuilding the figure data from checkpoints reproduces the files.
    const auto files = export_from_directory(cfg.out, dir / "export");
    CHECK(files.size() == 6);
    for (const auto& f : files) CHECK(slurp(f) == slurp(cfg.out / f.filename()));
}

TEST_CASE("comparison table") {
    const auto manifest = toy_manifest(fs::temp_directory_path() / "moods_h_cmp");
    const auto out = fs::temp_directory_path() / "moods_h_cmp_out";
    fs::remove_all(out);
    const auto rows = compare_methods({quick(manifest, Method::none), quick(manifest, Method::smote)}, out);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].method == Method::none);
    CHECK(rows[1].method == Method::smote);
    CHECK(rows[0].overlap_decrease == 0);
    CHECK(fs::exists(out / "comparison.csv"));
    CHECK(line_count(out / "comparison.csv") == 3);
    CHECK(comparison_text(rows).find("smote") != std::string::npos);

    CHECK_THROWS_AS(compare_methods({}), ArgumentError);
    auto other = quick(manifest, Method::smote);
    other.base_seed = 99;
    CHECK_THROWS_AS(compare_methods({quick(manifest, Method::none), other}), ArgumentError);
}

TEST_CASE("unwritable output directory") {
    const auto manifest = toy_manifest(fs::temp_directory_path() / "moods_h_io");
    const auto blocker = fs::temp_directory_path() / "moods_h_io" / "file";
    std::ofstream(blocker) << "x";
    auto cfg = quick(manifest, Method::none);
    cfg.out = blocker / "sub";
    CHECK_THROWS_AS(run_experiment(cfg), IoError);
}
