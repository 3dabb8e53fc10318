#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "moods/dataset.hpp"
#include "moods/model.hpp"

namespace moods {

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fn = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;

    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct F1Report {
    double f1 = 0;
    double f1_minority = 0;
    double f1_majority = 0;
    ConfusionCounts counts;
};

struct DiversificationReport {
    double overlap_before = 0;    // kappa_m of the reference set, in [0, 1]
    double overlap_after = 0;
    double overlap_decrease = 0;  // percentage points, may be negative
    double var_order_minority = 0;
    double var_order_majority = 0;
    double var_order_avg = 0;
    bool var_unbounded = false;   // a reference variance was zero
    double balance = 0;           // |S_m| / |S| of the resampled set
};

enum class ClassSide { minority, majority };

/// Result of the log10 variance-ratio comparison. When the reference variance
/// is zero the increase is unbounded: `value` is +inf and `after_variance`
/// carries the raw variance of the compared set.
struct VarianceOrder {
    double value = 0;
    bool unbounded = false;
    double before_variance = 0;
    double after_variance = 0;
};

/// z outputs of a model over a set, separated by class.
struct ClassOutputs {
    std::vector<double> minority;
    std::vector<double> majority;
};

ClassOutputs class_outputs(const ModelState& m, const Dataset& s);

ConfusionCounts confusion(const ModelState& m, const Dataset& d);
/// Confusion counts from precomputed outputs; `labels` are 0/1.
ConfusionCounts confusion_from_outputs(std::span<const double> z, std::span<const int> labels);

F1Report f1_scores(const ConfusionCounts& c);

double minority_overlap_fraction(const ModelState& m, const Dataset& s);
double overlap_fraction(std::span<const double> minority_z);

double overlap_decrease(const ModelState& m_before, const Dataset& before, const ModelState& m_after,
                        const Dataset& after);

VarianceOrder variance_order_increase(const ModelState& m_before, const Dataset& before, const ModelState& m_after,
                                      const Dataset& after, ClassSide which);
VarianceOrder variance_order(std::span<const double> before_z, std::span<const double> after_z);

DiversificationReport diversification_report(const ModelState& m_before, const Dataset& before,
                                             const ModelState& m_after, const Dataset& after);
DiversificationReport diversification_report(const ClassOutputs& before, const ClassOutputs& after);

/// True iff the overlap decreased by at least `epsilon` points and the
/// average variance order increased by at least `delta`.
bool epsilon_delta_check(const DiversificationReport& r, double epsilon, double delta);

struct ZHistogram {
    ClassOutputs z;
    double lo = 0;
    double hi = 0;
    std::vector<std::size_t> minority_counts;
    std::vector<std::size_t> majority_counts;
    std::vector<int> minority_bins;  // bin of each raw value, same order as z.minority
    std::vector<int> majority_bins;
};

ZHistogram z_histogram(const ModelState& m, const Dataset& s, int bins);
ZHistogram z_histogram(ClassOutputs z, int bins);

/// CSV with columns z,class,bin (class 1 = minority), one row per point.
std::string histogram_csv(const ZHistogram& h);
void write_histogram_csv(const ZHistogram& h, const std::filesystem::path& path);

nlohmann::json to_json(const ConfusionCounts& c);
nlohmann::json to_json(const F1Report& r);
nlohmann::json to_json(const DiversificationReport& r);
F1Report f1_report_from_json(const nlohmann::json& j);
DiversificationReport diversification_from_json(const nlohmann::json& j);

}  // namespace moods
