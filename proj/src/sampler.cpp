#include "moods/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "moods/error.hpp"
#include "moods/random.hpp"

namespace moods {

namespace {

// Stream tags for derive_seed.
constexpr std::uint64_t kInitDrawTag = 1;
constexpr std::uint64_t kModelTag = 2;
constexpr std::uint64_t kDrawTag = 3;
constexpr std::uint64_t kSmoteTag = 4;

std::string format_number(double v) { return nlohmann::json(v).dump(); }

}  // namespace

void MoodsConfig::validate() const {
    if (max_iter < 1) throw ArgumentError("max_iter must be >= 1");
    if (patience < 1) throw ArgumentError("patience must be >= 1");
    train.validate();
    smote.validate();
}

const char* to_string(Decision d) {
    switch (d) {
        case Decision::initial: return "initial";
        case Decision::accepted: return "accepted";
        case Decision::rejected: return "rejected";
    }
    return "?";
}

const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::max_iter: return "max_iter";
        case StopReason::patience: return "patience";
        case StopReason::pool_exhausted: return "pool_exhausted";
    }
    return "?";
}

Dataset SamplerState::sample() const {
    Dataset out(source->name() + "/moods", source->width());
    out.set_minority_label(source->minority_label());
    for (auto i : minority_index) out.push_back((*source)[i]);
    for (const auto& p : synthetic) out.push_back(p);
    for (auto i : majority_taken) out.push_back((*source)[i]);
    return out;
}

std::vector<std::ptrdiff_t> SamplerState::origin() const {
    std::vector<std::ptrdiff_t> out;
    for (auto i : minority_index) out.push_back(static_cast<std::ptrdiff_t>(i));
    out.insert(out.end(), synthetic.size(), -1);
    for (auto i : majority_taken) out.push_back(static_cast<std::ptrdiff_t>(i));
    return out;
}

std::vector<std::string> SamplerState::provenance() const {
    std::vector<std::string> out;
    for (auto o : origin()) out.emplace_back(o < 0 ? "synthetic" : "original");
    return out;
}

Evaluation evaluate(const Dataset& candidate, const Dataset& validation, const MoodsConfig& cfg,
                    std::uint64_t init_seed) {
    auto model = train(init_model(candidate.width(), init_seed), candidate, cfg.train);
    auto report = f1_scores(confusion(model, validation));
    return {report, std::move(model)};
}

SamplerState initialize(const Dataset& train_part, const Dataset& validation, const MoodsConfig& cfg) {
    cfg.validate();
    SamplerState st;
    st.source = std::make_shared<const Dataset>(train_part);
    st.seed = cfg.seed;
    st.init_seed = derive_seed(cfg.seed, kModelTag);

    std::vector<std::size_t> majority;
    for (std::size_t i = 0; i < train_part.size(); ++i) {
        (train_part[i].label == kMinority ? st.minority_index : majority).push_back(i);
    }
    if (st.minority_index.size() < 2) throw InitializationError("training part needs at least two minority points");
    const std::size_t m0 = (st.minority_index.size() + 1) / 2;
    if (majority.size() < m0) {
        throw InitializationError("majority pool (" + std::to_string(majority.size()) +
                                  ") smaller than initial draw " + std::to_string(m0));
    }

    // Uniform draw without replacement: partial Fisher-Yates.
    Rng rng(derive_seed(cfg.seed, kInitDrawTag));
    for (std::size_t t = 0; t < m0; ++t) {
        const auto j = t + rng.index(majority.size() - t);
        std::swap(majority[t], majority[j]);
    }
    st.majority_taken.assign(majority.begin(), majority.begin() + static_cast<std::ptrdiff_t>(m0));
    st.pool.assign(majority.begin() + static_cast<std::ptrdiff_t>(m0), majority.end());
    std::sort(st.pool.begin(), st.pool.end());
    st.weight.assign(st.pool.size(), st.pool.empty() ? 0.0 : 1.0 / static_cast<double>(st.pool.size()));
    st.draw_size = m0;

    auto eval = evaluate(st.sample(), validation, cfg, st.init_seed);
    st.best_f1 = eval.validation.f1;
    st.best_f1_minority = eval.validation.f1_minority;
    st.model = std::move(eval.model);
    return st;
}

std::vector<std::size_t> weighted_majority_draw(SamplerState& state, std::size_t count, std::uint64_t stream) {
    auto& w = state.weight;
    const std::size_t positive = static_cast<std::size_t>(std::count_if(w.begin(), w.end(), [](double v) { return v > 0; }));
    if (count > positive) {
        throw DrawExhausted("requested " + std::to_string(count) + " majority points, pool holds " +
                            std::to_string(positive) + " drawable");
    }
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& v : w) v /= total;

    Rng rng(derive_seed(state.seed, kDrawTag), stream);
    std::vector<double> remaining = w;
    std::vector<std::size_t> drawn;
    drawn.reserve(count);
    for (std::size_t t = 0; t < count; ++t) {
        const double mass = std::accumulate(remaining.begin(), remaining.end(), 0.0);
        const double target = rng.uniform() * mass;
        double cumulative = 0;
        std::size_t pick = remaining.size();
        std::size_t last_positive = remaining.size();
        for (std::size_t i = 0; i < remaining.size(); ++i) {
            if (remaining[i] <= 0) continue;
            last_positive = i;
            cumulative += remaining[i];
            if (target < cumulative) {
                pick = i;
                break;
            }
        }
        if (pick == remaining.size()) pick = last_positive;  // rounding at the upper end
        drawn.push_back(pick);
        remaining[pick] = 0;
    }
    return drawn;
}

std::size_t synthetic_top_up(std::size_t minority, std::size_t majority_so_far, std::size_t draw) {
    const std::size_t majority = majority_so_far + draw;
    return majority > minority ? majority - minority : 0;
}

Candidate propose(SamplerState& state, const MoodsConfig& cfg) {
    if (state.pool.size() < state.draw_size) throw DrawExhausted("majority pool smaller than draw size");
    Candidate c;
    c.drawn = weighted_majority_draw(state, state.draw_size, state.iteration);

    Dataset base = state.sample();
    const std::size_t minority = base.minority_count();
    const std::size_t majority = base.majority_count();
    for (auto pos : c.drawn) base.push_back((*state.source)[state.pool[pos]]);

    const auto n_synth = synthetic_top_up(minority, majority, c.drawn.size());
    const auto smote_seed = derive_seed(derive_seed(state.seed, kSmoteTag), state.iteration);
    auto generated = svm_smote_generate(base, static_cast<std::int64_t>(n_synth), cfg.smote, smote_seed);
    c.synthetic = generated.points();
    c.sample = std::move(base);
    c.sample.append(generated);
    return c;
}

StepRecord decide(SamplerState& state, Candidate candidate, Evaluation eval) {
    StepRecord rec;
    rec.step = ++state.iteration;
    rec.one_minus_f1 = 1.0 - eval.validation.f1;
    rec.one_minus_f1_minority = 1.0 - eval.validation.f1_minority;
    rec.sample_size = candidate.sample.size();
    rec.draw_size = state.draw_size;
    rec.n_synthetic = candidate.synthetic.size();

    const bool better = (1.0 - eval.validation.f1) < (1.0 - state.best_f1) &&
                        (1.0 - eval.validation.f1_minority) < (1.0 - state.best_f1_minority);
    if (better) {
        rec.decision = Decision::accepted;
        std::vector<bool> taken(state.pool.size(), false);
        for (auto pos : candidate.drawn) {
            taken[pos] = true;
            state.majority_taken.push_back(state.pool[pos]);
        }
        std::vector<std::size_t> pool;
        std::vector<double> weight;
        for (std::size_t i = 0; i < state.pool.size(); ++i) {
            if (taken[i]) continue;
            pool.push_back(state.pool[i]);
            weight.push_back(state.weight[i]);
        }
        state.pool = std::move(pool);
        state.weight = std::move(weight);
        for (auto& p : candidate.synthetic) state.synthetic.push_back(std::move(p));
        state.draw_size += 1;
        state.best_f1 = eval.validation.f1;
        state.best_f1_minority = eval.validation.f1_minority;
        state.model = std::move(eval.model);
        state.accepted += 1;
        state.rejection_streak = 0;
    } else {
        rec.decision = Decision::rejected;
        for (auto pos : candidate.drawn) state.weight[pos] *= 0.5;
        state.draw_size = std::max<std::size_t>(1, state.draw_size - 1);
        state.rejection_streak += 1;
    }
    return rec;
}

StepRecord step(SamplerState& state, const Dataset& validation, const MoodsConfig& cfg) {
    auto candidate = propose(state, cfg);
    auto eval = evaluate(candidate.sample, validation, cfg, state.init_seed);
    return decide(state, std::move(candidate), std::move(eval));
}

MoodsResult run(const DataSplit& split, const MoodsConfig& cfg) {
    MoodsResult result;
    auto state = initialize(split.train, split.validation, cfg);

    StepRecord first;
    first.step = 0;
    first.decision = Decision::initial;
    first.one_minus_f1 = 1.0 - state.best_f1;
    first.one_minus_f1_minority = 1.0 - state.best_f1_minority;
    first.sample_size = state.minority_index.size() + state.majority_taken.size();
    first.draw_size = state.draw_size;
    result.trace.push_back(first);

    result.stop = StopReason::max_iter;
    while (state.iteration < static_cast<std::size_t>(cfg.max_iter)) {
        if (state.rejection_streak >= static_cast<std::size_t>(cfg.patience)) {
            result.stop = StopReason::patience;
            break;
        }
        try {
            result.trace.push_back(step(state, split.validation, cfg));
        } catch (const DrawExhausted&) {
            result.stop = StopReason::pool_exhausted;
            break;
        }
    }
    result.sample = state.sample();
    result.provenance = state.provenance();
    result.model = state.model;
    result.state = std::move(state);
    return result;
}

std::string trace_csv(const std::vector<StepRecord>& trace) {
    std::string out = "step,decision,one_minus_f1,one_minus_f1_minority,sample_size,draw_size,n_synthetic\n";
    for (const auto& r : trace) {
        out += std::to_string(r.step) + "," + to_string(r.decision) + "," + format_number(r.one_minus_f1) + "," +
               format_number(r.one_minus_f1_minority) + "," + std::to_string(r.sample_size) + "," +
               std::to_string(r.draw_size) + "," + std::to_string(r.n_synthetic) + "\n";
    }
    return out;
}

void write_trace_csv(const std::vector<StepRecord>& trace, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << trace_csv(trace);
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<StepRecord> read_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    std::vector<StepRecord> out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string f[7];
        for (auto& field : f) {
            if (!std::getline(ls, field, ',')) throw ParseError("short trace row", row);
        }
        StepRecord r;
        try {
            r.step = std::stoul(f[0]);
            r.decision = f[1] == "accepted" ? Decision::accepted
                         : f[1] == "rejected" ? Decision::rejected
                                              : Decision::initial;
            r.one_minus_f1 = std::stod(f[2]);
            r.one_minus_f1_minority = std::stod(f[3]);
            r.sample_size = std::stoul(f[4]);
            r.draw_size = std::stoul(f[5]);
            r.n_synthetic = std::stoul(f[6]);
        } catch (const std::exception&) {
            throw ParseError("bad trace field", row);
        }
        out.push_back(r);
    }
    return out;
}

}  // namespace moods
