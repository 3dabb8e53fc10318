#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "moods/dataset.hpp"

namespace moods {

/// Layer widths of the feed-forward network. The output layer (width 1) is
/// implicit; `relu[i]` says whether hidden layer i is followed by a rectifier.
struct Architecture {
    std::size_t input = 0;
    std::vector<std::size_t> hidden{256, 128, 128};
    std::vector<bool> relu{true, true, false};

    std::size_t layer_count() const { return hidden.size() + 1; }
    std::size_t in_width(std::size_t layer) const { return layer == 0 ? input : hidden[layer - 1]; }
    std::size_t out_width(std::size_t layer) const { return layer < hidden.size() ? hidden[layer] : 1; }
    std::size_t parameter_count() const;

    friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// n -> 256 -> ReLU -> 128 -> ReLU -> 128 -> 1.
Architecture default_architecture(std::size_t input);

enum class InitMode { fan_in_uniform, zero };

/// Network parameters. Layout of `params`: for each layer, the weight matrix
/// (out x in, column-major) followed by the bias vector.
struct ModelState {
    Architecture arch;
    Eigen::VectorXd params;
    std::uint64_t init_seed = 0;

    Eigen::Map<const Eigen::MatrixXd> weight(std::size_t layer) const;
    Eigen::Map<const Eigen::VectorXd> bias(std::size_t layer) const;
    Eigen::Map<Eigen::MatrixXd> weight(std::size_t layer);
    Eigen::Map<Eigen::VectorXd> bias(std::size_t layer);
    std::size_t weight_offset(std::size_t layer) const;
};

struct TrainConfig {
    std::size_t batch_size = 32;
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double grad_tol = 1e-3;
    int max_epochs = 200;
    std::uint64_t seed = 0;

    void validate() const;
};

struct TrainStats {
    int epochs = 0;
    double initial_loss = 0;
    double final_loss = 0;
    double final_grad_norm = 0;
    std::vector<double> epoch_loss;  // full-batch loss after each epoch
};

struct LossParts {
    double total = 0;
    double minority = 0;
    double majority = 0;
};

struct PointProbabilities {
    double minority = 0.5;
    double majority = 0.5;
};

ModelState init_model(std::size_t input, std::uint64_t seed, InitMode mode = InitMode::fan_in_uniform);
ModelState init_model(const Architecture& arch, std::uint64_t seed, InitMode mode = InitMode::fan_in_uniform);

double forward(const ModelState& m, std::span<const double> x);

/// z for every column of `x` (input x batch).
Eigen::VectorXd forward_batch(const ModelState& m, const Eigen::MatrixXd& x);

/// z for every point of `d`, in order.
std::vector<double> outputs(const ModelState& m, const Dataset& d);

/// Two-logit softmax over (z, 1 - z): p_minority = sigmoid(2z - 1).
PointProbabilities point_probabilities(double z);

/// Per-point loss: -log p_minority for minority, -log p_majority for majority.
double point_loss(double z, int label);

LossParts sample_loss(const ModelState& m, const Dataset& s);

/// Adds `scale` times the gradient of the summed per-point loss over the
/// columns of `x` to `grad`; returns the scaled loss sum.
double accumulate_gradient(const ModelState& m, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double scale,
                           Eigen::VectorXd& grad);

/// Gradient of sample_loss(m, s).total with respect to the parameters.
Eigen::VectorXd loss_gradient(const ModelState& m, const Dataset& s, double* loss = nullptr);

ModelState train(ModelState m, const Dataset& s, const TrainConfig& cfg, TrainStats* stats = nullptr);

/// 0 iff p_majority >= p_minority, i.e. z <= 1/2.
inline int classify(double z) { return z > 0.5 ? kMinority : kMajority; }

/// Writes `<stem>.json` (architecture header) and `<stem>.bin`
/// (parameters as little-endian IEEE-754 doubles).
void save_checkpoint(const ModelState& m, const std::filesystem::path& stem);
ModelState load_checkpoint(const std::filesystem::path& stem);

/// Feature matrix (width x size) and 0/1 label vector of a dataset.
Eigen::MatrixXd feature_matrix(const Dataset& d);
Eigen::VectorXd label_vector(const Dataset& d);

}  // namespace moods
