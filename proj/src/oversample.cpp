#include <cmath>

#include "moods/error.hpp"
#include "moods/oversample.hpp"
#include "moods/random.hpp"

namespace moods {

namespace {

LabeledPoint between(const std::vector<double>& from, const std::vector<double>& to, double u) {
    LabeledPoint p;
    p.label = kMinority;
    p.features.resize(from.size());
    for (std::size_t c = 0; c < from.size(); ++c) p.features[c] = from[c] + u * (to[c] - from[c]);
    return p;
}

}  // namespace

std::vector<std::size_t> nearest_neighbors(const Dataset& s, std::span<const double> query, std::size_t k,
                                           std::size_t exclude) {
    return nearest_neighbors(s, query, k, exclude, [](std::size_t) { return true; });
}

std::vector<std::size_t> danger_indices(const Dataset& s, const SvmModel& svm, const SmoteConfig& cfg) {
    if (svm.alpha.size() != s.size()) throw ArgumentError("SVM was not fitted on this set");
    const std::size_t m = std::min(cfg.m_neighbors, s.size() - 1);
    std::vector<std::size_t> out;
    for (auto i : svm.support_vectors()) {
        if (s[i].label != kMinority) continue;
        const auto nn = nearest_neighbors(s, s[i].features, m, i);
        const bool mixed =
            std::any_of(nn.begin(), nn.end(), [&](std::size_t j) { return s[j].label == kMajority; });
        if (mixed) out.push_back(i);
    }
    return out;
}

Dataset danger_minority(const Dataset& s, const SvmModel& svm, const SmoteConfig& cfg) {
    return s.subset(danger_indices(s, svm, cfg));
}

Dataset smote_generate(const Dataset& minority, std::int64_t count, std::size_t k, std::uint64_t seed) {
    if (count < 0) throw ArgumentError("count must be non-negative");
    if (minority.size() < 2) throw ArgumentError("SMOTE needs at least two minority points");
    if (k < 1 || k > minority.size() - 1) throw ArgumentError("k must lie in [1, |minority| - 1]");

    std::vector<std::vector<std::size_t>> neighbors(minority.size());
    Dataset out(minority.name() + "/smote", minority.width());
    if (count == 0) return out;
    for (std::size_t i = 0; i < minority.size(); ++i) {
        neighbors[i] = nearest_neighbors(minority, minority[i].features, k, i);
    }
    Rng rng(seed);
    for (std::int64_t t = 0; t < count; ++t) {
        const auto base = rng.index(minority.size());
        const auto nn = neighbors[base][rng.index(neighbors[base].size())];
        out.push_back(between(minority[base].features, minority[nn].features, rng.uniform()));
    }
    return out;
}

Dataset svm_smote_generate(const Dataset& s, std::int64_t count, const SmoteConfig& cfg, std::uint64_t seed) {
    if (count < 0) throw ArgumentError("count must be non-negative");
    cfg.validate();
    const std::size_t n_minority = s.minority_count();
    if (n_minority < 2) throw ArgumentError("SVM-SMOTE needs at least two minority points");
    Dataset out(s.name() + "/svm-smote", s.width());
    if (count == 0) return out;

    const std::size_t k = std::min(cfg.k_neighbors, n_minority - 1);
    const auto svm = fit_svm(s, cfg, seed);
    auto danger = danger_indices(s, svm, cfg);
    if (danger.empty()) {
        auto [minority, majority] = class_partition(s);
        return smote_generate(minority, count, k, seed);
    }

    Rng rng(seed, 1);
    rng.shuffle(danger);
    const std::size_t m = std::min(cfg.m_neighbors, s.size() - 1);
    auto is_minority = [&](std::size_t j) { return s[j].label == kMinority; };
    auto is_majority = [&](std::size_t j) { return s[j].label == kMajority; };

    struct Plan {
        bool interpolate;
        std::vector<std::size_t> minority_nn;
        std::size_t majority_nn;
    };
    std::vector<Plan> plans;
    plans.reserve(danger.size());
    for (auto i : danger) {
        const auto nn = nearest_neighbors(s, s[i].features, m, i);
        const auto n_major = static_cast<std::size_t>(std::count_if(nn.begin(), nn.end(), is_majority));
        Plan plan;
        plan.interpolate = 2 * n_major < nn.size();
        plan.minority_nn = nearest_neighbors(s, s[i].features, k, i, is_minority);
        plan.majority_nn = nearest_neighbors(s, s[i].features, 1, i, is_majority).front();
        plans.push_back(std::move(plan));
    }

    for (std::int64_t t = 0; t < count; ++t) {
        const std::size_t slot = static_cast<std::size_t>(t) % danger.size();
        const auto& x = s[danger[slot]].features;
        const auto& plan = plans[slot];
        if (plan.interpolate) {
            const auto nn = plan.minority_nn[rng.index(plan.minority_nn.size())];
            out.push_back(between(x, s[nn].features, rng.uniform()));
        } else {
            // Away from the nearest majority point: x + u * bound * (x - x_major).
            const auto& away = s[plan.majority_nn].features;
            out.push_back(between(x, away, -cfg.step_bound * rng.uniform()));
        }
    }
    return out;
}

}  // namespace moods
