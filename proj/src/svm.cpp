#include <cmath>
#include <limits>

#include "moods/error.hpp"
#include "moods/oversample.hpp"

namespace moods {

namespace {

constexpr double kTau = 1e-12;
constexpr std::size_t kDenseKernelLimit = 4000;

// Kernel rows, dense when the problem is small enough, otherwise recomputed per request.
class KernelRows {
public:
    KernelRows(const Dataset& s, double gamma) : s_(s), gamma_(gamma), l_(s.size()) {
        if (l_ <= kDenseKernelLimit) {
            dense_.resize(l_ * l_);
            for (std::size_t i = 0; i < l_; ++i) {
                for (std::size_t j = i; j < l_; ++j) {
                    const double k = rbf_kernel(s[i].features, s[j].features, gamma);
                    dense_[i * l_ + j] = k;
                    dense_[j * l_ + i] = k;
                }
            }
        } else {
            scratch_[0].resize(l_);
            scratch_[1].resize(l_);
        }
    }

    const double* row(std::size_t i, int slot) {
        if (!dense_.empty()) return dense_.data() + i * l_;
        auto& buf = scratch_[slot];
        for (std::size_t j = 0; j < l_; ++j) buf[j] = rbf_kernel(s_[i].features, s_[j].features, gamma_);
        return buf.data();
    }

private:
    const Dataset& s_;
    double gamma_;
    std::size_t l_;
    std::vector<double> dense_;
    std::vector<double> scratch_[2];
};

}  // namespace

void SmoteConfig::validate() const {
    if (k_neighbors < 1) throw ArgumentError("k_neighbors must be >= 1");
    if (m_neighbors < k_neighbors) throw ArgumentError("m_neighbors must be >= k_neighbors");
    if (!(svm_c > 0)) throw ArgumentError("svm penalty C must be positive");
    if (!(step_bound > 0 && step_bound <= 1)) throw ArgumentError("step_bound must lie in (0, 1]");
    if (!(kkt_tol > 0)) throw ArgumentError("kkt_tol must be positive");
}

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
    double d2 = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
    return std::exp(-gamma * d2);
}

std::vector<std::size_t> SvmModel::support_vectors() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (alpha[i] > 0) out.push_back(i);
    }
    return out;
}

double SvmModel::decision(std::span<const double> x) const {
    double f = bias;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (alpha[i] > 0) f += alpha[i] * signed_label[i] * rbf_kernel(points[i], x, gamma);
    }
    return f;
}

double SvmModel::dual_objective() const {
    double quad = 0;
    double lin = 0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        lin += alpha[i];
        if (alpha[i] == 0) continue;
        for (std::size_t j = 0; j < alpha.size(); ++j) {
            if (alpha[j] == 0) continue;
            quad += alpha[i] * alpha[j] * signed_label[i] * signed_label[j] * rbf_kernel(points[i], points[j], gamma);
        }
    }
    return 0.5 * quad - lin;
}

SvmModel fit_svm(const Dataset& s, const SmoteConfig& cfg, std::uint64_t /*seed*/) {
    cfg.validate();
    if (s.minority_count() == 0 || s.majority_count() == 0) throw ArgumentError("fit_svm needs both classes");

    const std::size_t l = s.size();
    const double c = cfg.svm_c;
    SvmModel model;
    model.gamma = cfg.gamma_for(s.width());
    model.c = c;
    model.alpha.assign(l, 0.0);
    model.signed_label.resize(l);
    model.points.reserve(l);
    for (std::size_t i = 0; i < l; ++i) {
        model.signed_label[i] = s[i].label == kMinority ? 1.0 : -1.0;
        model.points.push_back(s[i].features);
    }
    const auto& y = model.signed_label;
    auto& alpha = model.alpha;

    KernelRows kernel(s, model.gamma);
    std::vector<double> grad(l, -1.0);  // G = Q alpha - e
    const double diag = 1.0;            // K(x, x) = 1 for the radial-basis kernel

    auto upper = [&](std::size_t t) { return alpha[t] >= c; };
    auto lower = [&](std::size_t t) { return alpha[t] <= 0; };

    long iter = 0;
    for (;; ++iter) {
        if (iter >= cfg.max_svm_iter) {
            throw TrainingError("SMO did not reach KKT tolerance after " + std::to_string(iter) + " iterations");
        }
        // Maximal violating i, then j by second-order gain.
        double gmax = -std::numeric_limits<double>::infinity();
        std::size_t i = l;
        for (std::size_t t = 0; t < l; ++t) {
            if (y[t] > 0) {
                if (!upper(t) && -grad[t] >= gmax) {
                    gmax = -grad[t];
                    i = t;
                }
            } else if (!lower(t) && grad[t] >= gmax) {
                gmax = grad[t];
                i = t;
            }
        }
        double gmax2 = -std::numeric_limits<double>::infinity();
        std::size_t j = l;
        double best = std::numeric_limits<double>::infinity();
        const double* ki = i < l ? kernel.row(i, 0) : nullptr;
        for (std::size_t t = 0; t < l; ++t) {
            if (y[t] > 0) {
                if (lower(t)) continue;
                const double diff = gmax + grad[t];
                gmax2 = std::max(gmax2, grad[t]);
                if (diff > 0 && ki) {
                    const double quad = 2 * diag - 2.0 * ki[t];
                    const double obj = -(diff * diff) / (quad > 0 ? quad : kTau);
                    if (obj <= best) {
                        best = obj;
                        j = t;
                    }
                }
            } else {
                if (upper(t)) continue;
                const double diff = gmax - grad[t];
                gmax2 = std::max(gmax2, -grad[t]);
                if (diff > 0 && ki) {
                    const double quad = 2 * diag - 2.0 * ki[t];
                    const double obj = -(diff * diff) / (quad > 0 ? quad : kTau);
                    if (obj <= best) {
                        best = obj;
                        j = t;
                    }
                }
            }
        }
        if (gmax + gmax2 < cfg.kkt_tol || j == l) break;

        const double* kj = kernel.row(j, 1);
        const double qij = y[i] * y[j] * ki[j];
        const double old_i = alpha[i];
        const double old_j = alpha[j];
        if (y[i] != y[j]) {
            double quad = 2 * diag + 2 * qij;
            if (quad <= 0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0) {
                if (alpha[j] < 0) {
                    alpha[j] = 0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0) {
                alpha[i] = 0;
                alpha[j] = -diff;
            }
            if (diff > 0) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if (alpha[j] > c) {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            double quad = 2 * diag - 2 * qij;
            if (quad <= 0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > c) {
                if (alpha[i] > c) {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if (alpha[j] < 0) {
                alpha[j] = 0;
                alpha[i] = sum;
            }
            if (sum > c) {
                if (alpha[j] > c) {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if (alpha[i] < 0) {
                alpha[i] = 0;
                alpha[j] = sum;
            }
        }
        const double di = alpha[i] - old_i;
        const double dj = alpha[j] - old_j;
        for (std::size_t t = 0; t < l; ++t) {
            grad[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
        }
    }
    model.iterations = iter;

    // Bias from free vectors, or the midpoint of the feasible interval.
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < l; ++t) {
        const double yg = y[t] * grad[t];
        if (upper(t)) {
            if (y[t] < 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (lower(t)) {
            if (y[t] > 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2;
    model.bias = -rho;
    return model;
}

}  // namespace moods
