#pragma once

// Fixtures and independent reference implementations shared by the unit and
// acceptance tests. Nothing here calls into the code it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "moods/dataset.hpp"

namespace testing {

using moods::Dataset;
using moods::LabeledPoint;

/// Two Gaussian blobs in 2-D: minority around (c, c), majority around the origin.
inline Dataset blobs(std::size_t n_minority, std::size_t n_majority, double c, double sd, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> noise(0.0, sd);
    std::vector<LabeledPoint> pts;
    for (std::size_t i = 0; i < n_majority; ++i) pts.push_back({{noise(gen), noise(gen)}, moods::kMajority});
    for (std::size_t i = 0; i < n_minority; ++i) pts.push_back({{c + noise(gen), c + noise(gen)}, moods::kMinority});
    std::shuffle(pts.begin(), pts.end(), gen);
    return Dataset("blobs", 2, std::move(pts));
}

inline Dataset random_points(std::size_t n, std::size_t width, int label, std::uint64_t seed, double lo = -1,
                             double hi = 1) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    Dataset d("random", width);
    for (std::size_t i = 0; i < n; ++i) {
        LabeledPoint p;
        p.label = label;
        for (std::size_t c = 0; c < width; ++c) p.features.push_back(u(gen));
        d.push_back(p);
    }
    return d;
}

struct Counts {
    std::size_t tp = 0, fn = 0, fp = 0, tn = 0;
};

/// Confusion counts straight from the definitions, predicted minority iff z > 1/2.
inline Counts brute_confusion(const std::vector<double>& z, const std::vector<int>& y) {
    Counts c;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const bool pred_min = z[i] > 0.5;
        const bool is_min = y[i] == 1;
        if (is_min && pred_min) ++c.tp;
        if (is_min && !pred_min) ++c.fn;
        if (!is_min && pred_min) ++c.fp;
        if (!is_min && !pred_min) ++c.tn;
    }
    return c;
}

/// 2PR / (P + R) with precision and recall computed separately.
inline double f1_from_pr(double tp, double fp, double fn) {
    const double p = tp / (tp + fp);
    const double r = tp / (tp + fn);
    if (tp == 0) return 0.0;
    return 2 * p * r / (p + r);
}

/// True iff `p` lies on the segment [a, b] (up to `tol`), i.e. p = a + u (b - a) with u in [0, 1].
inline bool on_segment(const std::vector<double>& p, const std::vector<double>& a, const std::vector<double>& b,
                       double tol = 1e-9) {
    double num = 0, den = 0;
    for (std::size_t c = 0; c < a.size(); ++c) {
        num += (p[c] - a[c]) * (b[c] - a[c]);
        den += (b[c] - a[c]) * (b[c] - a[c]);
    }
    const double u = den > 0 ? num / den : 0.0;
    if (u < -tol || u > 1 + tol) return false;
    double err = 0;
    for (std::size_t c = 0; c < a.size(); ++c) {
        const double d = a[c] + u * (b[c] - a[c]) - p[c];
        err += d * d;
    }
    return std::sqrt(err) <= tol * (1 + std::sqrt(den));
}

inline double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t c = 0; c < a.size(); ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
    return s;
}

/// Dual soft-margin SVM solved by enumerating every active set
/// (each alpha at 0, at C, or free). Feasible only for a handful of points.
struct QpSolution {
    std::vector<double> alpha;
    double objective = std::numeric_limits<double>::infinity();
};

inline QpSolution brute_force_svm_dual(const Eigen::MatrixXd& Q, const std::vector<double>& y, double C) {
    const int n = static_cast<int>(y.size());
    QpSolution best;
    int combos = 1;
    for (int i = 0; i < n; ++i) combos *= 3;
    for (int code = 0; code < combos; ++code) {
        std::vector<int> state(n);  // 0: at zero, 1: at C, 2: free
        int rest = code;
        for (int i = 0; i < n; ++i) {
            state[i] = rest % 3;
            rest /= 3;
        }
        std::vector<int> free;
        Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < n; ++i) {
            if (state[i] == 1) a[i] = C;
            if (state[i] == 2) free.push_back(i);
        }
        const int f = static_cast<int>(free.size());
        if (f > 0) {
            // Stationarity on free coordinates plus the equality constraint.
            Eigen::MatrixXd K = Eigen::MatrixXd::Zero(f + 1, f + 1);
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(f + 1);
            double fixed_sum = 0;
            for (int i = 0; i < n; ++i)
                if (state[i] != 2) fixed_sum += y[i] * a[i];
            for (int r = 0; r < f; ++r) {
                double q_fixed = 0;
                for (int i = 0; i < n; ++i)
                    if (state[i] != 2) q_fixed += Q(free[r], i) * a[i];
                for (int c = 0; c < f; ++c) K(r, c) = Q(free[r], free[c]);
                K(r, f) = y[free[r]];
                K(f, r) = y[free[r]];
                rhs[r] = 1.0 - q_fixed;
            }
            rhs[f] = -fixed_sum;
            const Eigen::VectorXd sol = K.completeOrthogonalDecomposition().solve(rhs);
            if (!((K * sol - rhs).norm() < 1e-9 * (1 + rhs.norm()))) continue;
            for (int r = 0; r < f; ++r) a[free[r]] = sol[r];
        }
        bool feasible = true;
        double eq = 0;
        for (int i = 0; i < n; ++i) {
            if (a[i] < -1e-12 || a[i] > C + 1e-12) feasible = false;
            eq += y[i] * a[i];
        }
        if (!feasible || std::abs(eq) > 1e-9) continue;
        const double obj = 0.5 * a.dot(Q * a) - a.sum();
        if (obj < best.objective) {
            best.objective = obj;
            best.alpha.assign(a.data(), a.data() + n);
        }
    }
    return best;
}

/// Danger set by exhaustive neighbour ranking: minority support vectors whose
/// m nearest other points (distance, then index) include a majority point.
inline std::vector<std::size_t> brute_danger(const Dataset& s, const std::vector<std::size_t>& support, std::size_t m) {
    std::vector<std::size_t> out;
    for (auto i : support) {
        if (s[i].label != moods::kMinority) continue;
        std::vector<std::size_t> order;
        for (std::size_t j = 0; j < s.size(); ++j)
            if (j != i) order.push_back(j);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return squared_distance(s[i].features, s[a].features) < squared_distance(s[i].features, s[b].features);
        });
        order.resize(std::min(m, order.size()));
        if (std::any_of(order.begin(), order.end(), [&](std::size_t j) { return s[j].label == moods::kMajority; })) {
            out.push_back(i);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace testing
