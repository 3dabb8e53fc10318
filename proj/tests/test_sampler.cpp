#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "moods/error.hpp"
#include "moods/sampler.hpp"
#include "support.hpp"

using namespace moods;

namespace {

MoodsConfig quick_config(std::uint64_t seed = 0) {
    MoodsConfig cfg;
    cfg.seed = seed;
    cfg.train.seed = seed;
    cfg.train.max_epochs = 30;
    cfg.train.learning_rate = 1e-3;
    cfg.max_iter = 25;
    cfg.patience = 8;
    return cfg;
}

DataSplit fixture_split(std::uint64_t seed) {
    return standardize(split(Dataset::make("blobs", testing::blobs(20, 150, 1.6, 1.0, seed).points()), {}, seed));
}

F1Report scores(double f1, double f1m) {
    F1Report r;
    r.f1 = f1;
    r.f1_minority = f1m;
    return r;
}

SamplerState manual_state(std::vector<double> weight, std::uint64_t seed) {
    SamplerState st;
    st.seed = seed;
    for (std::size_t i = 0; i < weight.size(); ++i) st.pool.push_back(i);
    st.weight = std::move(weight);
    return st;
}

}  // namespace

TEST_CASE("initial sample arithmetic") {
    auto train_part = testing::blobs(10, 100, 2.0, 0.8, 1);
    const auto validation = testing::blobs(5, 20, 2.0, 0.8, 2);
    const auto cfg = quick_config(3);
    const auto st = initialize(train_part, validation, cfg);
    CHECK(st.draw_size == 5);
    CHECK(st.majority_taken.size() == 5);
    CHECK(st.sample().size() == 15);
    CHECK(st.pool.size() == 95);
    for (double w : st.weight) CHECK(w == 1.0 / 95.0);
    const auto again = initialize(train_part, validation, cfg);
    CHECK(again.majority_taken == st.majority_taken);
    CHECK(again.model.params == st.model.params);
    // Baseline scores come from one training run on S_0.
    const auto eval = evaluate(st.sample(), validation, cfg, st.init_seed);
    CHECK(eval.validation.f1 == st.best_f1);
    CHECK(eval.validation.f1_minority == st.best_f1_minority);
}

TEST_CASE("initialization errors") {
    const auto validation = testing::blobs(5, 20, 2.0, 0.8, 2);
    Dataset few("few", 1, {{{0}, kMinority}, {{1}, kMajority}, {{2}, kMajority}});
    CHECK_THROWS_AS(initialize(few, validation, quick_config()), InitializationError);
    auto cfg = quick_config();
    cfg.patience = 0;
    CHECK_THROWS_AS(initialize(testing::blobs(10, 100, 2.0, 0.8, 1), validation, cfg), ArgumentError);
}

TEST_CASE("weighted draw") {
    SUBCASE("uniform weights, whole pool") {
        auto st = manual_state(std::vector<double>(6, 1.0 / 6), 1);
        auto drawn = weighted_majority_draw(st, 6, 0);
        std::sort(drawn.begin(), drawn.end());
        CHECK(drawn == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});
    }
    SUBCASE("zero mass is never drawn") {
        auto st = manual_state({0.3, 0.0, 0.7}, 2);
        for (std::uint64_t t = 0; t < 10000; ++t) CHECK(weighted_majority_draw(st, 1, t).front() != 1);
    }
    SUBCASE("frequencies within three sigma of p") {
        const std::vector<double> p{0.5, 0.25, 0.25};
        auto st = manual_state(p, 3);
        const int trials = 100000;
        std::vector<int> hits(3, 0);
        for (int t = 0; t < trials; ++t) ++hits[weighted_majority_draw(st, 1, static_cast<std::uint64_t>(t)).front()];
        for (std::size_t i = 0; i < 3; ++i) {
            const double sigma = std::sqrt(trials * p[i] * (1 - p[i]));
            CHECK(std::abs(hits[i] - trials * p[i]) < 3 * sigma);
        }
    }
    SUBCASE("weights are normalized before drawing") {
        auto st = manual_state({2.0, 1.0, 1.0}, 4);
        weighted_majority_draw(st, 2, 0);
        CHECK(st.weight[0] == 0.5);
        CHECK(st.weight[1] == 0.25);
    }
    SUBCASE("not enough drawable points") {
        auto st = manual_state({0.5, 0.0, 0.5}, 5);
        CHECK_THROWS_AS(weighted_majority_draw(st, 3, 0), DrawExhausted);
    }
}

TEST_CASE("synthetic top-up") {
    CHECK(synthetic_top_up(10, 6, 5) == 1);
    CHECK(synthetic_top_up(10, 3, 2) == 0);
    CHECK(synthetic_top_up(10, 10, 0) == 0);
}

TEST_CASE("proposal balances the candidate") {
    auto train_part = testing::blobs(10, 100, 1.5, 1.0, 4);
    const auto validation = testing::blobs(5, 20, 1.5, 1.0, 5);
    const auto cfg = quick_config(1);
    auto st = initialize(train_part, validation, cfg);
    st.draw_size = 9;  // 10 minority, 5 + 9 majority -> 4 synthetic
    const auto c = propose(st, cfg);
    CHECK(c.drawn.size() == 9);
    CHECK(c.synthetic.size() == 4);
    CHECK(c.sample.minority_count() == c.sample.majority_count());
    CHECK(c.sample.size() == 28);
}

TEST_CASE("accept and reject rules") {
    auto train_part = testing::blobs(10, 100, 1.5, 1.0, 6);
    const auto validation = testing::blobs(5, 20, 1.5, 1.0, 7);
    const auto cfg = quick_config(2);
    auto base = initialize(train_part, validation, cfg);
    base.best_f1 = 0.6;
    base.best_f1_minority = 0.4;
    base.draw_size = 3;

    SUBCASE("strict improvement in both is accepted") {
        auto st = base;
        auto c = propose(st, cfg);
        const auto pool_before = st.pool.size();
        const auto rec = decide(st, c, {scores(0.61, 0.41), st.model});
        CHECK(rec.decision == Decision::accepted);
        CHECK(st.pool.size() == pool_before - 3);
        CHECK(st.weight.size() == st.pool.size());
        CHECK(st.draw_size == 4);
        CHECK(st.best_f1 == 0.61);
        CHECK(st.majority_taken.size() == base.majority_taken.size() + 3);
        CHECK(st.rejection_streak == 0);
    }
    SUBCASE("a tie in either objective is rejected and only p and M change") {
        auto st = base;
        auto c = propose(st, cfg);
        const auto weights = st.weight;  // normalized by the draw
        const auto rec = decide(st, c, {scores(0.7, 0.4), st.model});
        CHECK(rec.decision == Decision::rejected);
        CHECK(st.sample() == base.sample());
        CHECK(st.pool == base.pool);
        CHECK(st.best_f1 == base.best_f1);
        CHECK(st.best_f1_minority == base.best_f1_minority);
        CHECK(st.draw_size == 2);
        CHECK(st.rejection_streak == 1);
        std::set<std::size_t> drawn(c.drawn.begin(), c.drawn.end());
        for (std::size_t i = 0; i < st.weight.size(); ++i) {
            CHECK(st.weight[i] == (drawn.count(i) ? weights[i] / 2 : weights[i]));
        }
    }
    SUBCASE("draw size never drops below one") {
        auto st = base;
        st.draw_size = 1;
        auto c = propose(st, cfg);
        decide(st, c, {scores(0.1, 0.1), st.model});
        CHECK(st.draw_size == 1);
    }
}

TEST_CASE("evaluate is deterministic and agrees with the metrics module") {
    const auto sp = fixture_split(3);
    const auto cfg = quick_config(3);
    const auto a = evaluate(sp.train, sp.validation, cfg, 77);
    const auto b = evaluate(sp.train, sp.validation, cfg, 77);
    CHECK(a.model.params == b.model.params);
    const auto r = f1_scores(confusion(a.model, sp.validation));
    CHECK(a.validation.f1 == r.f1);
    CHECK(a.validation.f1_minority == r.f1_minority);
}

TEST_CASE("full run invariants on a 2-D imbalanced fixture") {
    for (std::uint64_t seed : {0u, 1u}) {
        CAPTURE(seed);
        const auto sp = fixture_split(seed);
        const auto cfg = quick_config(seed);
        const auto r = run(sp, cfg);

        REQUIRE(r.trace.size() >= 2);
        CHECK(r.trace.front().decision == Decision::initial);
        double prev_f1 = r.trace.front().one_minus_f1, prev_f1m = r.trace.front().one_minus_f1_minority;
        for (std::size_t i = 1; i < r.trace.size(); ++i) {
            CHECK(r.trace[i].step == i);
            if (r.trace[i].decision != Decision::accepted) continue;
            CHECK(r.trace[i].one_minus_f1 < prev_f1);
            CHECK(r.trace[i].one_minus_f1_minority < prev_f1m);
            prev_f1 = r.trace[i].one_minus_f1;
            prev_f1m = r.trace[i].one_minus_f1_minority;
        }

        // Every original point appears once and comes from the training part.
        const auto origin = r.state.origin();
        REQUIRE(origin.size() == r.sample.size());
        std::set<std::ptrdiff_t> seen;
        std::size_t synthetic = 0;
        for (std::size_t i = 0; i < origin.size(); ++i) {
            if (origin[i] < 0) {
                ++synthetic;
                CHECK(r.provenance[i] == "synthetic");
                CHECK(r.sample[i].label == kMinority);
                continue;
            }
            CHECK(seen.insert(origin[i]).second);
            CHECK(r.provenance[i] == "original");
            CHECK(r.sample[i].features == sp.train[static_cast<std::size_t>(origin[i])].features);
        }
        CHECK(synthetic == r.state.synthetic.size());
        for (auto p : r.state.pool) CHECK(seen.count(static_cast<std::ptrdiff_t>(p)) == 0);
        CHECK(r.state.pool.size() + r.state.majority_taken.size() == sp.train.majority_count());

        // Determinism.
        const auto again = run(sp, cfg);
        CHECK(trace_csv(again.trace) == trace_csv(r.trace));
        CHECK(again.sample == r.sample);
        CHECK(again.model.params == r.model.params);
    }
}

TEST_CASE("a tiny majority pool ends the run cleanly") {
    // Six minority points need a first draw of three, but only one majority point is left.
    Dataset train_part("tiny", 2, {});
    for (int i = 0; i < 6; ++i) train_part.push_back({{2.0 + 0.1 * i, 2.0 - 0.05 * i}, kMinority});
    for (int i = 0; i < 4; ++i) train_part.push_back({{-0.1 * i, 0.2 * i}, kMajority});
    DataSplit sp;
    sp.train = train_part;
    sp.validation = testing::blobs(3, 6, 2.0, 0.3, 1);
    sp.test = sp.validation;
    const auto r = run(sp, quick_config());
    CHECK(r.stop == StopReason::pool_exhausted);
    REQUIRE(r.trace.size() == 1);
    CHECK(r.trace[0].decision == Decision::initial);
    CHECK(r.sample.size() == 9);
}

TEST_CASE("trace CSV round-trip") {
    std::vector<StepRecord> trace{{0, Decision::initial, 0.5, 1.0, 15, 5, 0},
                                  {1, Decision::rejected, 0.25, 0.125, 20, 5, 0},
                                  {2, Decision::accepted, 0.1, 0.2, 22, 4, 3}};
    const auto path = std::filesystem::temp_directory_path() / "moods_trace.csv";
    write_trace_csv(trace, path);
    const auto back = read_trace_csv(path);
    REQUIRE(back.size() == 3);
    CHECK(trace_csv(back) == trace_csv(trace));
    CHECK(back[2].decision == Decision::accepted);
    CHECK(back[2].n_synthetic == 3);
    std::filesystem::remove(path);
}
