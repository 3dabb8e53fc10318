#include "moods/harness.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "moods/error.hpp"
#include "moods/oversample.hpp"
#include "moods/random.hpp"

namespace moods {

namespace {

using nlohmann::json;

// Shared with the sampler so every method starts from the same initial weights.
constexpr std::uint64_t kModelTag = 2;
constexpr std::uint64_t kSmoteTag = 11;
constexpr std::uint64_t kSvmSmoteTag = 12;

json number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what(), 0);
    }
}

void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

Aggregate fold(const std::vector<double>& values) {
    Aggregate a;
    if (values.empty()) {
        a.mean = std::numeric_limits<double>::quiet_NaN();
        return a;
    }
    double sum = 0;
    for (double v : values) sum += v;
    a.mean = sum / static_cast<double>(values.size());
    a.variance = std::isfinite(a.mean) ? sample_variance(values) : std::numeric_limits<double>::quiet_NaN();
    return a;
}

json to_json(const Aggregate& a) { return {{"mean", number(a.mean)}, {"variance", number(a.variance)}}; }

std::string run_file(const char* prefix, int run, const char* ext) {
    return std::string(prefix) + "_" + std::to_string(run) + ext;
}

Dataset top_up(const Dataset& train, Method method, const SmoteConfig& smote, std::uint64_t seed) {
    const auto minority = train.minority_count();
    const auto count = static_cast<std::int64_t>(train.majority_count() - minority);
    Dataset out = train;
    if (method == Method::smote) {
        auto [min_part, maj_part] = class_partition(train);
        const std::size_t k = std::min(smote.k_neighbors, minority - 1);
        out.append(smote_generate(min_part, count, k, derive_seed(seed, kSmoteTag)));
    } else {
        out.append(svm_smote_generate(train, count, smote, derive_seed(seed, kSvmSmoteTag)));
    }
    return out;
}

}  // namespace

const char* to_string(Method m) {
    switch (m) {
        case Method::none: return "none";
        case Method::smote: return "smote";
        case Method::svm_smote: return "svm_smote";
        case Method::moods: return "moods";
    }
    return "?";
}

Method parse_method(const std::string& name) {
    if (name == "none" || name == "w/o") return Method::none;
    if (name == "smote") return Method::smote;
    if (name == "svm_smote" || name == "svm-smote") return Method::svm_smote;
    if (name == "moods") return Method::moods;
    throw ArgumentError("unknown method '" + name + "'");
}

void ExperimentConfig::validate() const {
    if (n_runs < 1) throw ArgumentError("n_runs must be >= 1");
    if (hist_bins < 1) throw ArgumentError("hist_bins must be >= 1");
    if (dataset.empty()) throw ArgumentError("dataset manifest path is required");
    moods.validate();
}

json to_json(const ExperimentConfig& cfg) {
    const auto& t = cfg.moods.train;
    const auto& s = cfg.moods.smote;
    return {
        {"dataset", cfg.dataset.generic_string()},
        {"method", to_string(cfg.method)},
        {"runs", cfg.n_runs},
        {"seed", cfg.base_seed},
        {"fractions", {{"train", cfg.fractions.train}, {"validation", cfg.fractions.validation}, {"test", cfg.fractions.test}}},
        {"train",
         {{"batch_size", t.batch_size},
          {"learning_rate", t.learning_rate},
          {"beta1", t.beta1},
          {"beta2", t.beta2},
          {"epsilon", t.epsilon},
          {"grad_tol", t.grad_tol},
          {"max_epochs", t.max_epochs}}},
        {"smote",
         {{"k_neighbors", s.k_neighbors},
          {"m_neighbors", s.m_neighbors},
          {"svm_c", s.svm_c},
          {"gamma", s.gamma},
          {"step_bound", s.step_bound},
          {"kkt_tol", s.kkt_tol},
          {"max_svm_iter", s.max_svm_iter}}},
        {"moods", {{"max_iter", cfg.moods.max_iter}, {"patience", cfg.moods.patience}}},
        {"hist_bins", cfg.hist_bins},
    };
}

ExperimentConfig experiment_config_from_json(const json& j, const std::filesystem::path& base_dir) {
    ExperimentConfig cfg;
    try {
        auto get = [](const json& obj, const char* key, auto& field) {
            if (obj.contains(key)) field = obj.at(key).get<std::decay_t<decltype(field)>>();
        };
        if (j.contains("dataset")) {
            std::filesystem::path p = j.at("dataset").get<std::string>();
            cfg.dataset = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
        }
        if (j.contains("method")) cfg.method = parse_method(j.at("method").get<std::string>());
        get(j, "runs", cfg.n_runs);
        get(j, "seed", cfg.base_seed);
        get(j, "hist_bins", cfg.hist_bins);
        if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
        if (j.contains("fractions")) {
            const auto& f = j.at("fractions");
            get(f, "train", cfg.fractions.train);
            get(f, "validation", cfg.fractions.validation);
            get(f, "test", cfg.fractions.test);
        }
        if (j.contains("train")) {
            const auto& t = j.at("train");
            auto& tc = cfg.moods.train;
            get(t, "batch_size", tc.batch_size);
            get(t, "learning_rate", tc.learning_rate);
            get(t, "beta1", tc.beta1);
            get(t, "beta2", tc.beta2);
            get(t, "epsilon", tc.epsilon);
            get(t, "grad_tol", tc.grad_tol);
            get(t, "max_epochs", tc.max_epochs);
        }
        if (j.contains("smote")) {
            const auto& s = j.at("smote");
            auto& sc = cfg.moods.smote;
            get(s, "k_neighbors", sc.k_neighbors);
            get(s, "m_neighbors", sc.m_neighbors);
            get(s, "svm_c", sc.svm_c);
            get(s, "gamma", sc.gamma);
            get(s, "step_bound", sc.step_bound);
            get(s, "kkt_tol", sc.kkt_tol);
            get(s, "max_svm_iter", sc.max_svm_iter);
        }
        if (j.contains("moods")) {
            get(j.at("moods"), "max_iter", cfg.moods.max_iter);
            get(j.at("moods"), "patience", cfg.moods.patience);
        }
    } catch (const json::exception& e) {
        throw ArgumentError(std::string("bad experiment config: ") + e.what());
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    return experiment_config_from_json(read_json(path), path.parent_path());
}

RunResult run_single(const Dataset& data, const ExperimentConfig& cfg, int run_index) {
    RunResult r;
    r.run = run_index;
    r.seed = cfg.base_seed + static_cast<std::uint64_t>(run_index);
    const auto start = std::chrono::steady_clock::now();
    try {
        const auto parts = standardize(split(data, cfg.fractions, r.seed));
        MoodsConfig mc = cfg.moods;
        mc.seed = r.seed;
        mc.train.seed = r.seed;
        const auto init_seed = derive_seed(r.seed, kModelTag);

        r.train = parts.train;
        r.baseline = train(init_model(data.width(), init_seed), parts.train, mc.train);
        r.baseline_test = f1_scores(confusion(r.baseline, parts.test));

        switch (cfg.method) {
            case Method::none:
                r.resampled = parts.train;
                r.final_model = r.baseline;
                break;
            case Method::smote:
            case Method::svm_smote:
                r.resampled = top_up(parts.train, cfg.method, mc.smote, r.seed);
                r.final_model = train(init_model(data.width(), init_seed), r.resampled, mc.train);
                break;
            case Method::moods: {
                auto m = run(parts, mc);
                r.resampled = std::move(m.sample);
                r.provenance = std::move(m.provenance);
                r.final_model = std::move(m.model);
                r.trace = std::move(m.trace);
                r.stop = m.stop;
                break;
            }
        }
        if (r.provenance.empty()) {
            r.provenance.assign(r.resampled.size(), "synthetic");
            std::fill_n(r.provenance.begin(), parts.train.size(), "original");
        }
        r.diversification = diversification_report(r.baseline, parts.train, r.final_model, r.resampled);
        // The test part is scored once, after everything else is fixed.
        r.test = f1_scores(confusion(r.final_model, parts.test));
        r.ok = true;
    } catch (const std::exception& e) {
        r.ok = false;
        r.error = e.what();
    }
    r.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

json to_json(const RunResult& r) {
    json j = {{"run", r.run}, {"seed", r.seed}, {"ok", r.ok}};
    if (!r.ok) {
        j["error"] = r.error;
        return j;
    }
    j["test"] = to_json(r.test);
    j["baseline_test"] = to_json(r.baseline_test);
    j["diversification"] = to_json(r.diversification);
    j["train_size"] = r.train.size();
    j["resampled_size"] = r.resampled.size();
    j["resampled_minority"] = r.resampled.minority_count();
    j["synthetic"] = std::count(r.provenance.begin(), r.provenance.end(), "synthetic");
    if (r.stop) {
        j["stop"] = to_string(*r.stop);
        j["steps"] = r.trace.empty() ? 0 : r.trace.back().step;
        j["accepted"] = std::count_if(r.trace.begin(), r.trace.end(),
                                      [](const StepRecord& s) { return s.decision == Decision::accepted; });
    }
    return j;
}

ExperimentSummary summarize(const ExperimentConfig& cfg, std::string dataset_name, std::vector<RunResult> runs) {
    ExperimentSummary s;
    s.config = cfg;
    s.dataset_name = std::move(dataset_name);
    std::vector<double> f1, f1m, f1M, base, dk, dO, bal;
    for (const auto& r : runs) {
        if (!r.ok) {
            ++s.failed;
            continue;
        }
        f1.push_back(r.test.f1);
        f1m.push_back(r.test.f1_minority);
        f1M.push_back(r.test.f1_majority);
        base.push_back(r.baseline_test.f1);
        dk.push_back(r.diversification.overlap_decrease);
        dO.push_back(r.diversification.var_order_avg);
        bal.push_back(r.diversification.balance);
    }
    s.f1 = fold(f1);
    s.f1_minority = fold(f1m);
    s.f1_majority = fold(f1M);
    s.baseline_f1 = fold(base);
    s.overlap_decrease = fold(dk);
    s.var_order_avg = fold(dO);
    s.balance = fold(bal);
    s.runs = std::move(runs);
    return s;
}

json to_json(const ExperimentSummary& s) {
    json runs = json::array();
    for (const auto& r : s.runs) runs.push_back(to_json(r));
    return {
        {"dataset", s.dataset_name},
        {"method", to_string(s.config.method)},
        {"config", to_json(s.config)},
        {"runs", s.runs.size()},
        {"failed", s.failed},
        {"test_f1", to_json(s.f1)},
        {"test_f1_minority", to_json(s.f1_minority)},
        {"test_f1_majority", to_json(s.f1_majority)},
        {"baseline_test_f1", to_json(s.baseline_f1)},
        {"overlap_decrease", to_json(s.overlap_decrease)},
        {"var_order_avg", to_json(s.var_order_avg)},
        {"balance", to_json(s.balance)},
        {"per_run", runs},
    };
}

ExperimentSummary run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto data = load_dataset(load_manifest(cfg.dataset));
    if (!cfg.out.empty()) ensure_directory(cfg.out);

    std::vector<RunResult> runs;
    for (int i = 0; i < cfg.n_runs; ++i) {
        auto r = run_single(data, cfg, i);
        if (!cfg.out.empty()) {
            write_text(cfg.out / run_file("run", i, ".json"), to_json(r).dump(2) + "\n");
            if (r.ok) {
                export_figures(r, cfg.out, cfg.hist_bins);
                save_csv(r.resampled, cfg.out / run_file("final_set", i, ".csv"), &r.provenance);
                save_checkpoint(r.baseline, cfg.out / run_file("model_baseline", i, ""));
                save_checkpoint(r.final_model, cfg.out / run_file("model_final", i, ""));
            }
        }
        runs.push_back(std::move(r));
    }
    auto summary = summarize(cfg, data.name(), std::move(runs));
    if (!cfg.out.empty()) write_text(cfg.out / "summary.json", to_json(summary).dump(2) + "\n");
    return summary;
}

std::vector<ComparisonRow> comparison_rows(const std::vector<ExperimentSummary>& summaries) {
    std::vector<ComparisonRow> rows;
    for (const auto& s : summaries) {
        ComparisonRow row;
        row.method = s.config.method;
        row.runs = static_cast<int>(s.runs.size());
        row.failed = s.failed;
        row.f1 = s.f1.mean;
        row.f1_minority = s.f1_minority.mean;
        row.f1_majority = s.f1_majority.mean;
        row.overlap_decrease = s.overlap_decrease.mean;
        row.var_order_avg = s.var_order_avg.mean;
        rows.push_back(row);
    }
    return rows;
}

std::vector<ComparisonRow> compare_methods(const std::vector<ExperimentConfig>& cfgs, const std::filesystem::path& out) {
    if (cfgs.empty()) throw ArgumentError("compare_methods needs at least one config");
    const auto& first = cfgs.front();
    for (const auto& c : cfgs) {
        const bool same = std::filesystem::weakly_canonical(c.dataset) == std::filesystem::weakly_canonical(first.dataset) &&
                          c.base_seed == first.base_seed && c.n_runs == first.n_runs &&
                          c.fractions.train == first.fractions.train &&
                          c.fractions.validation == first.fractions.validation &&
                          c.fractions.test == first.fractions.test;
        if (!same) throw ArgumentError("compared configs must share dataset, splits, seed and run count");
    }
    std::vector<ExperimentSummary> summaries;
    for (auto c : cfgs) {
        if (!out.empty()) c.out = out / to_string(c.method);
        summaries.push_back(run_experiment(c));
    }
    auto rows = comparison_rows(summaries);
    if (!out.empty()) {
        ensure_directory(out);
        write_text(out / "comparison.csv", comparison_csv(rows));
        write_text(out / "comparison.txt", comparison_text(rows));
    }
    return rows;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
    std::string out = "method,runs,failed,f1,f1_minority,f1_majority,overlap_decrease,var_order_avg\n";
    for (const auto& r : rows) {
        out += std::string(to_string(r.method)) + "," + std::to_string(r.runs) + "," + std::to_string(r.failed);
        for (double v : {r.f1, r.f1_minority, r.f1_majority, r.overlap_decrease, r.var_order_avg}) {
            out += "," + number(v).dump();
        }
        out += "\n";
    }
    return out;
}

std::string comparison_text(const std::vector<ComparisonRow>& rows) {
    std::ostringstream os;
    os << std::left << std::setw(10) << "method" << std::right << std::setw(6) << "runs" << std::setw(8) << "F1"
       << std::setw(8) << "F1_m" << std::setw(8) << "F1_M" << std::setw(10) << "dkappa" << std::setw(8) << "dO" << "\n";
    os << std::fixed;
    for (const auto& r : rows) {
        os << std::left << std::setw(10) << to_string(r.method) << std::right << std::setw(6) << r.runs
           << std::setprecision(3) << std::setw(8) << r.f1 << std::setw(8) << r.f1_minority << std::setw(8)
           << r.f1_majority << std::setprecision(1) << std::setw(10) << r.overlap_decrease << std::setprecision(2)
           << std::setw(8) << r.var_order_avg << "\n";
    }
    return os.str();
}

void export_figures(const RunResult& r, const std::filesystem::path& out, int bins) {
    if (!r.ok) throw ArgumentError("cannot export a failed run");
    ensure_directory(out);
    write_histogram_csv(z_histogram(r.baseline, r.train, bins), out / run_file("hist_baseline", r.run, ".csv"));
    write_histogram_csv(z_histogram(r.final_model, r.resampled, bins), out / run_file("hist_final", r.run, ".csv"));
    if (!r.trace.empty()) write_trace_csv(r.trace, out / run_file("trace", r.run, ".csv"));
}

std::vector<std::filesystem::path> export_from_directory(const std::filesystem::path& run_dir,
                                                         const std::filesystem::path& out) {
    const auto summary = read_json(run_dir / "summary.json");
    const auto cfg = experiment_config_from_json(summary.at("config"));
    const auto data = load_dataset(load_manifest(cfg.dataset));
    ensure_directory(out);

    std::vector<std::filesystem::path> written;
    for (int i = 0; i < cfg.n_runs; ++i) {
        if (!std::filesystem::exists(run_dir / run_file("model_final", i, ".json"))) continue;  // failed run
        RunResult r;
        r.run = i;
        r.seed = cfg.base_seed + static_cast<std::uint64_t>(i);
        r.ok = true;
        r.train = standardize(split(data, cfg.fractions, r.seed)).train;
        r.resampled = load_csv(run_dir / run_file("final_set", i, ".csv"), saved_csv_schema());
        r.baseline = load_checkpoint(run_dir / run_file("model_baseline", i, ""));
        r.final_model = load_checkpoint(run_dir / run_file("model_final", i, ""));
        const auto trace_path = run_dir / run_file("trace", i, ".csv");
        if (std::filesystem::exists(trace_path)) r.trace = read_trace_csv(trace_path);
        export_figures(r, out, cfg.hist_bins);
        written.push_back(out / run_file("hist_baseline", i, ".csv"));
        written.push_back(out / run_file("hist_final", i, ".csv"));
        if (!r.trace.empty()) written.push_back(out / run_file("trace", i, ".csv"));
    }
    return written;
}

}  // namespace moods
