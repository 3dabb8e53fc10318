#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "moods/dataset.hpp"

namespace moods {

struct SmoteConfig {
    std::size_t k_neighbors = 5;
    std::size_t m_neighbors = 10;
    double svm_c = 1.0;
    double gamma = 0.0;  // radial-basis bandwidth; <= 0 selects 1 / width
    double step_bound = 0.5;
    double kkt_tol = 1e-3;
    long max_svm_iter = 10'000'000;

    void validate() const;
    double gamma_for(std::size_t width) const { return gamma > 0 ? gamma : 1.0 / static_cast<double>(width); }
};

/// Soft-margin kernel SVM in dual form. Decision value for x is
/// sum_i alpha_i y'_i K(x_i, x) + bias, with y' in {-1, +1} (minority = +1).
struct SvmModel {
    double gamma = 1.0;
    double c = 1.0;
    std::vector<double> alpha;        // one per training point, in [0, C]
    std::vector<double> signed_label; // y'
    std::vector<std::vector<double>> points;
    double bias = 0.0;
    long iterations = 0;

    std::vector<std::size_t> support_vectors() const;
    double decision(std::span<const double> x) const;
    /// 1/2 a'Qa - sum(a): the dual objective being minimised.
    double dual_objective() const;
};

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

/// Sequential minimal optimization with second-order working-set selection.
/// The solver is deterministic; `seed` is accepted for interface symmetry
/// with the generators and does not change the result.
SvmModel fit_svm(const Dataset& s, const SmoteConfig& cfg, std::uint64_t seed = 0);

/// Indices (into `s`) of `k` nearest points to `query` among those accepted by `keep`,
/// ordered by distance then index; `exclude` is skipped.
template <typename Keep>
std::vector<std::size_t> nearest_neighbors(const Dataset& s, std::span<const double> query, std::size_t k,
                                           std::size_t exclude, Keep keep);

std::vector<std::size_t> nearest_neighbors(const Dataset& s, std::span<const double> query, std::size_t k,
                                           std::size_t exclude = static_cast<std::size_t>(-1));

/// Indices of minority support vectors whose m nearest neighbours in `s`
/// are not all minority.
std::vector<std::size_t> danger_indices(const Dataset& s, const SvmModel& svm, const SmoteConfig& cfg);
Dataset danger_minority(const Dataset& s, const SvmModel& svm, const SmoteConfig& cfg);

/// Classic SMOTE: x + u (x_nn - x) with x_nn among the k nearest minority neighbours.
Dataset smote_generate(const Dataset& minority, std::int64_t count, std::size_t k, std::uint64_t seed);

/// SVM-SMOTE. Borderline minority support vectors are visited round-robin
/// over a seeded shuffle. A point with fewer than half majority points among
/// its m nearest neighbours is interpolated toward one of its k nearest
/// minority neighbours; otherwise it is pushed away from its nearest
/// majority neighbour by at most `step_bound` of their distance. Falls back
/// to plain SMOTE when no borderline point exists.
Dataset svm_smote_generate(const Dataset& s, std::int64_t count, const SmoteConfig& cfg, std::uint64_t seed);

// ---------------------------------------------------------------------------

template <typename Keep>
std::vector<std::size_t> nearest_neighbors(const Dataset& s, std::span<const double> query, std::size_t k,
                                           std::size_t exclude, Keep keep) {
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i == exclude || !keep(i)) continue;
        double d2 = 0;
        const auto& f = s[i].features;
        for (std::size_t c = 0; c < f.size(); ++c) d2 += (f[c] - query[c]) * (f[c] - query[c]);
        dist.emplace_back(d2, i);
    }
    const std::size_t take = std::min(k, dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(take), dist.end());
    std::vector<std::size_t> out(take);
    for (std::size_t i = 0; i < take; ++i) out[i] = dist[i].second;
    return out;
}

}  // namespace moods
