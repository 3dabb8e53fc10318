#include "moods/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "json.hpp"

#include "moods/error.hpp"
#include "moods/random.hpp"

namespace moods {

namespace {

// log(1 + e^t) without overflow.
double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

double sigmoid(double t) {
    if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

constexpr std::size_t kChunk = 512;

}  // namespace

std::size_t Architecture::parameter_count() const {
    std::size_t total = 0;
    for (std::size_t l = 0; l < layer_count(); ++l) total += out_width(l) * in_width(l) + out_width(l);
    return total;
}

Architecture default_architecture(std::size_t input) {
    Architecture a;
    a.input = input;
    return a;
}

std::size_t ModelState::weight_offset(std::size_t layer) const {
    std::size_t off = 0;
    for (std::size_t l = 0; l < layer; ++l) off += arch.out_width(l) * arch.in_width(l) + arch.out_width(l);
    return off;
}

Eigen::Map<const Eigen::MatrixXd> ModelState::weight(std::size_t layer) const {
    return {params.data() + weight_offset(layer), static_cast<Eigen::Index>(arch.out_width(layer)),
            static_cast<Eigen::Index>(arch.in_width(layer))};
}

Eigen::Map<const Eigen::VectorXd> ModelState::bias(std::size_t layer) const {
    return {params.data() + weight_offset(layer) + arch.out_width(layer) * arch.in_width(layer),
            static_cast<Eigen::Index>(arch.out_width(layer))};
}

Eigen::Map<Eigen::MatrixXd> ModelState::weight(std::size_t layer) {
    return {params.data() + weight_offset(layer), static_cast<Eigen::Index>(arch.out_width(layer)),
            static_cast<Eigen::Index>(arch.in_width(layer))};
}

Eigen::Map<Eigen::VectorXd> ModelState::bias(std::size_t layer) {
    return {params.data() + weight_offset(layer) + arch.out_width(layer) * arch.in_width(layer),
            static_cast<Eigen::Index>(arch.out_width(layer))};
}

void TrainConfig::validate() const {
    if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
    if (!(learning_rate > 0)) throw ArgumentError("learning_rate must be positive");
    if (!(grad_tol >= 0)) throw ArgumentError("grad_tol must be non-negative");
    if (max_epochs < 1) throw ArgumentError("max_epochs must be >= 1");
}

ModelState init_model(std::size_t input, std::uint64_t seed, InitMode mode) {
    return init_model(default_architecture(input), seed, mode);
}

ModelState init_model(const Architecture& arch, std::uint64_t seed, InitMode mode) {
    if (arch.input == 0) throw ArgumentError("input width must be >= 1");
    if (arch.relu.size() != arch.hidden.size()) throw ArgumentError("one activation flag per hidden layer");
    for (auto w : arch.hidden) {
        if (w == 0) throw ArgumentError("hidden widths must be >= 1");
    }
    ModelState m;
    m.arch = arch;
    m.init_seed = seed;
    m.params = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(arch.parameter_count()));
    if (mode == InitMode::zero) return m;

    Rng rng(seed);
    for (std::size_t l = 0; l < arch.layer_count(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(arch.in_width(l)));
        auto w = m.weight(l);
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-bound, bound);
        auto b = m.bias(l);
        for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = rng.uniform(-bound, bound);
    }
    return m;
}

Eigen::VectorXd forward_batch(const ModelState& m, const Eigen::MatrixXd& x) {
    if (static_cast<std::size_t>(x.rows()) != m.arch.input) {
        throw ArgumentError("input width " + std::to_string(x.rows()) + " does not match model width " +
                            std::to_string(m.arch.input));
    }
    Eigen::MatrixXd a = x;
    for (std::size_t l = 0; l < m.arch.layer_count(); ++l) {
        Eigen::MatrixXd pre = m.weight(l) * a;
        pre.colwise() += m.bias(l);
        if (l < m.arch.hidden.size() && m.arch.relu[l]) pre = pre.cwiseMax(0.0);
        a = std::move(pre);
    }
    return a.row(0).transpose();
}

double forward(const ModelState& m, std::span<const double> x) {
    if (x.size() != m.arch.input) {
        throw ArgumentError("input width " + std::to_string(x.size()) + " does not match model width " +
                            std::to_string(m.arch.input));
    }
    Eigen::MatrixXd col = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
    return forward_batch(m, col)[0];
}

Eigen::MatrixXd feature_matrix(const Dataset& d) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(d.width()), static_cast<Eigen::Index>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) {
        x.col(static_cast<Eigen::Index>(i)) =
            Eigen::Map<const Eigen::VectorXd>(d[i].features.data(), static_cast<Eigen::Index>(d.width()));
    }
    return x;
}

Eigen::VectorXd label_vector(const Dataset& d) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) y[static_cast<Eigen::Index>(i)] = d[i].label;
    return y;
}

std::vector<double> outputs(const ModelState& m, const Dataset& d) {
    if (d.empty()) return {};
    const Eigen::VectorXd z = forward_batch(m, feature_matrix(d));
    return {z.data(), z.data() + z.size()};
}

PointProbabilities point_probabilities(double z) {
    const double p = sigmoid(2.0 * z - 1.0);
    return {p, 1.0 - p};
}

double point_loss(double z, int label) {
    // -log(e^z / (e^z + e^{1-z})) = log(1 + e^{1-2z}); the majority case mirrors it.
    return label == kMinority ? softplus(1.0 - 2.0 * z) : softplus(2.0 * z - 1.0);
}

LossParts sample_loss(const ModelState& m, const Dataset& s) {
    if (s.empty()) throw ArgumentError("sample_loss on an empty set");
    const auto z = outputs(m, s);
    const double inv = 1.0 / static_cast<double>(s.size());
    LossParts out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double l = point_loss(z[i], s[i].label) * inv;
        (s[i].label == kMinority ? out.minority : out.majority) += l;
    }
    out.total = out.minority + out.majority;
    return out;
}

double accumulate_gradient(const ModelState& m, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double scale,
                           Eigen::VectorXd& grad) {
    const std::size_t layers = m.arch.layer_count();
    std::vector<Eigen::MatrixXd> acts(layers);  // input to each layer
    std::vector<Eigen::MatrixXd> pre(layers);
    acts[0] = x;
    for (std::size_t l = 0; l < layers; ++l) {
        pre[l] = m.weight(l) * acts[l];
        pre[l].colwise() += m.bias(l);
        if (l + 1 < layers) {
            acts[l + 1] = m.arch.relu[l] ? pre[l].cwiseMax(0.0).eval() : pre[l];
        }
    }

    const Eigen::Index batch = x.cols();
    Eigen::MatrixXd delta(1, batch);
    double loss = 0;
    for (Eigen::Index j = 0; j < batch; ++j) {
        const double z = pre[layers - 1](0, j);
        const int label = y[j] > 0.5 ? kMinority : kMajority;
        loss += point_loss(z, label);
        // d/dz of point_loss = 2 (sigmoid(2z - 1) - y)
        delta(0, j) = scale * 2.0 * (sigmoid(2.0 * z - 1.0) - y[j]);
    }

    for (std::size_t l = layers; l-- > 0;) {
        const std::size_t off = m.weight_offset(l);
        const auto out_w = static_cast<Eigen::Index>(m.arch.out_width(l));
        const auto in_w = static_cast<Eigen::Index>(m.arch.in_width(l));
        Eigen::Map<Eigen::MatrixXd> gw(grad.data() + off, out_w, in_w);
        Eigen::Map<Eigen::VectorXd> gb(grad.data() + off + out_w * in_w, out_w);
        gw.noalias() += delta * acts[l].transpose();
        gb += delta.rowwise().sum();
        if (l > 0) {
            Eigen::MatrixXd back = m.weight(l).transpose() * delta;
            if (m.arch.relu[l - 1]) back = back.cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
            delta = std::move(back);
        }
    }
    return loss * scale;
}

namespace {

// Full-batch gradient over pre-packed data, chunked in a fixed order.
double full_gradient(const ModelState& m, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Eigen::VectorXd& grad) {
    grad.setZero(m.params.size());
    const Eigen::Index n = x.cols();
    const double scale = 1.0 / static_cast<double>(n);
    double loss = 0;
    for (Eigen::Index start = 0; start < n; start += kChunk) {
        const Eigen::Index len = std::min<Eigen::Index>(kChunk, n - start);
        loss += accumulate_gradient(m, x.middleCols(start, len), y.segment(start, len), scale, grad);
    }
    return loss;
}

}  // namespace

Eigen::VectorXd loss_gradient(const ModelState& m, const Dataset& s, double* loss) {
    if (s.empty()) throw ArgumentError("loss_gradient on an empty set");
    Eigen::VectorXd grad;
    const double l = full_gradient(m, feature_matrix(s), label_vector(s), grad);
    if (loss) *loss = l;
    return grad;
}

ModelState train(ModelState m, const Dataset& s, const TrainConfig& cfg, TrainStats* stats) {
    cfg.validate();
    if (s.minority_count() == 0 || s.majority_count() == 0) throw ArgumentError("training set needs both classes");
    if (s.width() != m.arch.input) throw ArgumentError("training set width does not match model");

    const Eigen::MatrixXd x = feature_matrix(s);
    const Eigen::VectorXd y = label_vector(s);
    const auto n = static_cast<Eigen::Index>(s.size());
    const auto batch = static_cast<Eigen::Index>(cfg.batch_size);

    Eigen::VectorXd grad;
    Eigen::VectorXd first = Eigen::VectorXd::Zero(m.params.size());
    Eigen::VectorXd second = Eigen::VectorXd::Zero(m.params.size());
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Eigen::MatrixXd xb(x.rows(), batch);
    Eigen::VectorXd yb(batch);

    TrainStats local;
    double loss = full_gradient(m, x, y, grad);
    double grad_norm = grad.norm();
    local.initial_loss = loss;
    if (!std::isfinite(loss)) throw TrainingError("non-finite loss", 0);

    long step = 0;
    int epoch = 0;
    while (grad_norm > cfg.grad_tol && epoch < cfg.max_epochs) {
        Rng rng(cfg.seed, static_cast<std::uint64_t>(epoch));
        rng.shuffle(order);
        for (Eigen::Index start = 0; start < n; start += batch) {
            const Eigen::Index len = std::min(batch, n - start);
            xb.resize(x.rows(), len);
            yb.resize(len);
            for (Eigen::Index j = 0; j < len; ++j) {
                const auto src = order[static_cast<std::size_t>(start + j)];
                xb.col(j) = x.col(src);
                yb[j] = y[src];
            }
            grad.setZero(m.params.size());
            const double batch_loss = accumulate_gradient(m, xb, yb, 1.0 / static_cast<double>(len), grad);
            if (!std::isfinite(batch_loss)) throw TrainingError("non-finite loss", epoch);

            ++step;
            first = cfg.beta1 * first + (1.0 - cfg.beta1) * grad;
            second = cfg.beta2 * second + (1.0 - cfg.beta2) * grad.cwiseAbs2();
            const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
            m.params.array() -=
                cfg.learning_rate * (first.array() / c1) / ((second.array() / c2).sqrt() + cfg.epsilon);
        }
        ++epoch;
        loss = full_gradient(m, x, y, grad);
        if (!std::isfinite(loss)) throw TrainingError("non-finite loss", epoch);
        grad_norm = grad.norm();
        local.epoch_loss.push_back(loss);
    }
    local.epochs = epoch;
    local.final_loss = loss;
    local.final_grad_norm = grad_norm;
    if (stats) *stats = std::move(local);
    return m;
}

// ---------------------------------------------------------------------------
// Checkpoints

void save_checkpoint(const ModelState& m, const std::filesystem::path& stem) {
    nlohmann::json header;
    header["format"] = "moods-checkpoint";
    header["version"] = 1;
    header["input"] = m.arch.input;
    header["hidden"] = m.arch.hidden;
    std::vector<int> relu(m.arch.relu.begin(), m.arch.relu.end());
    header["relu"] = relu;
    header["init_seed"] = m.init_seed;
    header["parameter_count"] = m.params.size();
    header["dtype"] = "float64-le";

    auto json_path = stem;
    json_path += ".json";
    auto bin_path = stem;
    bin_path += ".bin";
    std::ofstream js(json_path);
    if (!js) throw IoError("cannot write " + json_path.string());
    js << header.dump(2) << '\n';

    std::ofstream bin(bin_path, std::ios::binary);
    if (!bin) throw IoError("cannot write " + bin_path.string());
    for (Eigen::Index i = 0; i < m.params.size(); ++i) {
        auto bits = std::bit_cast<std::uint64_t>(m.params[i]);
        unsigned char bytes[8];
        for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(bits >> (8 * b));
        bin.write(reinterpret_cast<const char*>(bytes), 8);
    }
    if (!js || !bin) throw IoError("checkpoint write failed for " + stem.string());
}

ModelState load_checkpoint(const std::filesystem::path& stem) {
    auto json_path = stem;
    json_path += ".json";
    auto bin_path = stem;
    bin_path += ".bin";
    std::ifstream js(json_path);
    if (!js) throw IoError("cannot open " + json_path.string());
    nlohmann::json header;
    try {
        js >> header;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(json_path.string() + ": " + e.what());
    }
    if (header.value("format", "") != "moods-checkpoint") throw ParseError(json_path.string() + ": not a checkpoint");

    Architecture arch;
    arch.input = header.at("input").get<std::size_t>();
    arch.hidden = header.at("hidden").get<std::vector<std::size_t>>();
    const auto relu = header.at("relu").get<std::vector<int>>();
    arch.relu.assign(relu.begin(), relu.end());
    ModelState m = init_model(arch, header.value("init_seed", std::uint64_t{0}), InitMode::zero);
    if (header.at("parameter_count").get<std::size_t>() != arch.parameter_count()) {
        throw ParseError(json_path.string() + ": parameter count does not match architecture");
    }

    std::ifstream bin(bin_path, std::ios::binary);
    if (!bin) throw IoError("cannot open " + bin_path.string());
    for (Eigen::Index i = 0; i < m.params.size(); ++i) {
        unsigned char bytes[8];
        if (!bin.read(reinterpret_cast<char*>(bytes), 8)) throw ParseError(bin_path.string() + ": truncated");
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
        m.params[i] = std::bit_cast<double>(bits);
    }
    if (bin.peek() != std::char_traits<char>::eof()) throw ParseError(bin_path.string() + ": trailing bytes");
    return m;
}

}  // namespace moods
