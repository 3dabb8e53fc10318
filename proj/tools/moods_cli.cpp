// Command-line front end: run one method, compare methods, or re-export figure data.

#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "moods/error.hpp"
#include "moods/harness.hpp"

namespace {

struct CommonFlags {
    std::string config;
    std::string dataset;
    std::optional<int> runs;
    std::optional<std::uint64_t> seed;
    std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config, "JSON experiment config")->check(CLI::ExistingFile);
    cmd->add_option("--dataset", f.dataset, "dataset manifest (JSON)");
    cmd->add_option("--runs", f.runs, "number of seeded runs")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", f.seed, "base seed; run i uses seed + i");
    cmd->add_option("--out", f.out, "output directory");
}

moods::ExperimentConfig build_config(const CommonFlags& f) {
    moods::ExperimentConfig cfg = f.config.empty() ? moods::ExperimentConfig{} : moods::load_experiment_config(f.config);
    if (!f.dataset.empty()) cfg.dataset = f.dataset;
    if (f.runs) cfg.n_runs = *f.runs;
    if (f.seed) cfg.base_seed = *f.seed;
    if (!f.out.empty()) cfg.out = f.out;
    return cfg;
}

void print_summary(const moods::ExperimentSummary& s) {
    std::cout << s.dataset_name << " / " << moods::to_string(s.config.method) << ": " << s.runs.size() << " runs, "
              << s.failed << " failed\n";
    for (const auto& r : s.runs) {
        std::cerr << "  run " << r.run << " (seed " << r.seed << ") " << std::fixed << std::setprecision(1)
                  << r.duration_seconds << " s";
        if (!r.ok) std::cerr << "  error: " << r.error;
        std::cerr << "\n";
    }
    std::cout << std::setprecision(4) << "  test F1   " << s.f1.mean << " (var " << s.f1.variance << ")\n"
              << "  test F1_m " << s.f1_minority.mean << "\n"
              << "  test F1_M " << s.f1_majority.mean << "\n"
              << "  w/o F1    " << s.baseline_f1.mean << "\n"
              << "  dkappa_m  " << s.overlap_decrease.mean << "\n"
              << "  dO(s^2)   " << s.var_order_avg.mean << "\n"
              << "  balance   " << s.balance.mean << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MOODS resampling experiments"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    std::string method;
    auto* run_cmd = app.add_subcommand("run", "run one method over several seeds");
    add_common(run_cmd, run_flags);
    run_cmd->add_option("--method", method, "none | smote | svm_smote | moods");

    CommonFlags cmp_flags;
    std::vector<std::string> methods{"none", "smote", "svm_smote", "moods"};
    auto* cmp_cmd = app.add_subcommand("compare", "run several methods on identical splits");
    add_common(cmp_cmd, cmp_flags);
    cmp_cmd->add_option("--method", methods, "methods to compare (repeatable or comma separated)")->delimiter(',');

    std::string from, export_out;
    auto* exp_cmd = app.add_subcommand("export", "rebuild histogram and trace CSVs from a run directory");
    exp_cmd->add_option("--from", from, "directory written by `run`")->required()->check(CLI::ExistingDirectory);
    exp_cmd->add_option("--out", export_out, "destination directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            auto cfg = build_config(run_flags);
            if (!method.empty()) cfg.method = moods::parse_method(method);
            const auto summary = moods::run_experiment(cfg);
            print_summary(summary);
            return summary.failed == static_cast<int>(summary.runs.size()) ? 1 : 0;
        }
        if (*cmp_cmd) {
            const auto base = build_config(cmp_flags);
            std::vector<moods::ExperimentConfig> cfgs;
            for (const auto& m : methods) {
                auto c = base;
                c.method = moods::parse_method(m);
                c.out.clear();
                cfgs.push_back(c);
            }
            const auto rows = moods::compare_methods(cfgs, base.out);
            std::cout << moods::comparison_text(rows);
            return 0;
        }
        if (*exp_cmd) {
            for (const auto& p : moods::export_from_directory(from, export_out)) std::cout << p.string() << "\n";
            return 0;
        }
    } catch (const moods::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
