#include "moods/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "moods/error.hpp"

namespace moods {

ClassOutputs class_outputs(const ModelState& m, const Dataset& s) {
    const auto z = outputs(m, s);
    ClassOutputs out;
    for (std::size_t i = 0; i < s.size(); ++i) (s[i].label == kMinority ? out.minority : out.majority).push_back(z[i]);
    return out;
}

ConfusionCounts confusion_from_outputs(std::span<const double> z, std::span<const int> labels) {
    if (z.size() != labels.size()) throw ArgumentError("outputs and labels differ in length");
    ConfusionCounts c;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const int predicted = classify(z[i]);
        if (labels[i] == kMinority) {
            (predicted == kMinority ? c.tp : c.fn) += 1;
        } else {
            (predicted == kMinority ? c.fp : c.tn) += 1;
        }
    }
    return c;
}

ConfusionCounts confusion(const ModelState& m, const Dataset& d) {
    if (d.minority_count() == 0 || d.majority_count() == 0) {
        throw ArgumentError("confusion needs at least one point of each class");
    }
    const auto z = outputs(m, d);
    std::vector<int> labels(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) labels[i] = d[i].label;
    return confusion_from_outputs(z, labels);
}

F1Report f1_scores(const ConfusionCounts& c) {
    if (c.tp + c.fn == 0 || c.fp + c.tn == 0) throw ArgumentError("f1_scores needs both classes evaluated");
    const auto ratio = [](std::size_t num, std::size_t den) {
        return static_cast<double>(num) / static_cast<double>(den);
    };
    F1Report r;
    r.counts = c;
    r.f1_minority = ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn);
    r.f1_majority = ratio(2 * c.tn, 2 * c.tn + c.fn + c.fp);
    r.f1 = (r.f1_minority + r.f1_majority) / 2;
    return r;
}

double overlap_fraction(std::span<const double> minority_z) {
    if (minority_z.empty()) throw ArgumentError("overlap needs at least one minority point");
    const auto wrong = std::count_if(minority_z.begin(), minority_z.end(), [](double z) { return z <= 0.5; });
    return static_cast<double>(wrong) / static_cast<double>(minority_z.size());
}

double minority_overlap_fraction(const ModelState& m, const Dataset& s) {
    return overlap_fraction(class_outputs(m, s).minority);
}

double overlap_decrease(const ModelState& m_before, const Dataset& before, const ModelState& m_after,
                        const Dataset& after) {
    if (!(m_before.arch == m_after.arch)) throw ArgumentError("compared models must share one architecture");
    return (minority_overlap_fraction(m_before, before) - minority_overlap_fraction(m_after, after)) * 100.0;
}

VarianceOrder variance_order(std::span<const double> before_z, std::span<const double> after_z) {
    if (before_z.size() < 2 || after_z.size() < 2) {
        throw ArgumentError("variance comparison needs at least two points per side");
    }
    VarianceOrder v;
    v.before_variance = sample_variance({before_z.begin(), before_z.end()});
    v.after_variance = sample_variance({after_z.begin(), after_z.end()});
    if (v.before_variance == 0) {
        v.unbounded = v.after_variance != 0;
        v.value = v.unbounded ? std::numeric_limits<double>::infinity() : 0.0;
        return v;
    }
    if (v.after_variance == 0) {
        v.value = -std::numeric_limits<double>::infinity();
        return v;
    }
    // Unfloored log10 ratio.
    v.value = std::log10(v.after_variance / v.before_variance);
    return v;
}

VarianceOrder variance_order_increase(const ModelState& m_before, const Dataset& before, const ModelState& m_after,
                                      const Dataset& after, ClassSide which) {
    if (!(m_before.arch == m_after.arch)) throw ArgumentError("compared models must share one architecture");
    const auto b = class_outputs(m_before, before);
    const auto a = class_outputs(m_after, after);
    return which == ClassSide::minority ? variance_order(b.minority, a.minority) : variance_order(b.majority, a.majority);
}

DiversificationReport diversification_report(const ClassOutputs& before, const ClassOutputs& after) {
    DiversificationReport r;
    r.overlap_before = overlap_fraction(before.minority);
    r.overlap_after = overlap_fraction(after.minority);
    r.overlap_decrease = (r.overlap_before - r.overlap_after) * 100.0;
    const auto vm = variance_order(before.minority, after.minority);
    const auto vM = variance_order(before.majority, after.majority);
    r.var_order_minority = vm.value;
    r.var_order_majority = vM.value;
    r.var_unbounded = vm.unbounded || vM.unbounded;
    r.var_order_avg = (r.var_order_minority + r.var_order_majority) / 2;
    const double n_after = static_cast<double>(after.minority.size() + after.majority.size());
    r.balance = static_cast<double>(after.minority.size()) / n_after;
    return r;
}

DiversificationReport diversification_report(const ModelState& m_before, const Dataset& before,
                                             const ModelState& m_after, const Dataset& after) {
    if (!(m_before.arch == m_after.arch)) throw ArgumentError("compared models must share one architecture");
    return diversification_report(class_outputs(m_before, before), class_outputs(m_after, after));
}

bool epsilon_delta_check(const DiversificationReport& r, double epsilon, double delta) {
    return r.overlap_decrease >= epsilon && r.var_order_avg >= delta;
}

ZHistogram z_histogram(ClassOutputs z, int bins) {
    if (bins < 1) throw ArgumentError("bins must be >= 1");
    ZHistogram h;
    h.z = std::move(z);
    h.minority_counts.assign(static_cast<std::size_t>(bins), 0);
    h.majority_counts.assign(static_cast<std::size_t>(bins), 0);
    bool any = false;
    for (const auto* side : {&h.z.minority, &h.z.majority}) {
        for (double v : *side) {
            if (!any) {
                h.lo = h.hi = v;
                any = true;
            }
            h.lo = std::min(h.lo, v);
            h.hi = std::max(h.hi, v);
        }
    }
    const double width = (h.hi - h.lo) / bins;
    auto bin_of = [&](double v) {
        if (!(width > 0)) return 0;
        const int b = static_cast<int>(std::floor((v - h.lo) / width));
        return std::clamp(b, 0, bins - 1);
    };
    for (double v : h.z.minority) {
        const int b = bin_of(v);
        h.minority_bins.push_back(b);
        ++h.minority_counts[static_cast<std::size_t>(b)];
    }
    for (double v : h.z.majority) {
        const int b = bin_of(v);
        h.majority_bins.push_back(b);
        ++h.majority_counts[static_cast<std::size_t>(b)];
    }
    return h;
}

ZHistogram z_histogram(const ModelState& m, const Dataset& s, int bins) { return z_histogram(class_outputs(m, s), bins); }

std::string histogram_csv(const ZHistogram& h) {
    std::string out = "z,class,bin\n";
    auto emit = [&](const std::vector<double>& z, const std::vector<int>& bins, char cls) {
        for (std::size_t i = 0; i < z.size(); ++i) {
            out += nlohmann::json(z[i]).dump();
            out += ',';
            out += cls;
            out += ',';
            out += std::to_string(bins[i]);
            out += '\n';
        }
    };
    emit(h.z.minority, h.minority_bins, '1');
    emit(h.z.majority, h.majority_bins, '0');
    return out;
}

void write_histogram_csv(const ZHistogram& h, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << histogram_csv(h);
    if (!out) throw IoError("write failed for " + path.string());
}

nlohmann::json to_json(const ConfusionCounts& c) {
    return {{"tp", c.tp}, {"fn", c.fn}, {"fp", c.fp}, {"tn", c.tn}};
}

nlohmann::json to_json(const F1Report& r) {
    return {{"f1", r.f1}, {"f1_minority", r.f1_minority}, {"f1_majority", r.f1_majority}, {"counts", to_json(r.counts)}};
}

namespace {

// JSON has no infinities; they are written as the strings "inf" / "-inf".
nlohmann::json finite_or_tag(double v) {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : "-inf";
}

double number_or_inf(const nlohmann::json& j) {
    if (j.is_string()) {
        return j.get<std::string>() == "-inf" ? -std::numeric_limits<double>::infinity()
                                              : std::numeric_limits<double>::infinity();
    }
    return j.get<double>();
}

}  // namespace

nlohmann::json to_json(const DiversificationReport& r) {
    return {{"overlap_before", r.overlap_before},
            {"overlap_after", r.overlap_after},
            {"overlap_decrease", r.overlap_decrease},
            {"var_order_minority", finite_or_tag(r.var_order_minority)},
            {"var_order_majority", finite_or_tag(r.var_order_majority)},
            {"var_order_avg", finite_or_tag(r.var_order_avg)},
            {"var_unbounded", r.var_unbounded},
            {"balance", r.balance}};
}

F1Report f1_report_from_json(const nlohmann::json& j) {
    F1Report r;
    r.f1 = j.at("f1").get<double>();
    r.f1_minority = j.at("f1_minority").get<double>();
    r.f1_majority = j.at("f1_majority").get<double>();
    const auto& c = j.at("counts");
    r.counts = {c.at("tp").get<std::size_t>(), c.at("fn").get<std::size_t>(), c.at("fp").get<std::size_t>(),
                c.at("tn").get<std::size_t>()};
    return r;
}

DiversificationReport diversification_from_json(const nlohmann::json& j) {
    DiversificationReport r;
    r.overlap_before = j.at("overlap_before").get<double>();
    r.overlap_after = j.at("overlap_after").get<double>();
    r.overlap_decrease = j.at("overlap_decrease").get<double>();
    r.var_order_minority = number_or_inf(j.at("var_order_minority"));
    r.var_order_majority = number_or_inf(j.at("var_order_majority"));
    r.var_order_avg = number_or_inf(j.at("var_order_avg"));
    r.var_unbounded = j.at("var_unbounded").get<bool>();
    r.balance = j.at("balance").get<double>();
    return r;
}

}  // namespace moods
