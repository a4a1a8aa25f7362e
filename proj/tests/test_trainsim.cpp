// Copyright 2026 The PaRO Planner Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "paro/strategy.hpp"
#include "paro/trainsim.hpp"

using namespace paro;

namespace {

TrainConfig config(std::int64_t n, std::int64_t m, std::int64_t s, std::int64_t steps) {
    TrainConfig c;
    c.cluster = validate_cluster(n, m, s);
    c.steps = steps;
    c.seed = 42;
    return c;
}

double loss_of(const TinyModel& model, const std::vector<std::vector<double>>& params, const std::vector<Sample>& b) {
    std::vector<std::vector<double>> scratch;
    for (const auto& p : params) scratch.emplace_back(p.size(), 0.0);
    return accumulate_gradients(model.dims, params, b, scratch);
}

} // namespace

TEST(TinyModel, ShapeAndSpec) {
    const TinyModel m = TinyModel::make(default_dims(), 42);
    // (6*16+16) + (16*16+16) + (16*2+2)
    EXPECT_EQ(m.param_count(), 418);
    EXPECT_EQ(m.n_layers(), 3);
    const ModelSpec spec = m.spec();
    EXPECT_EQ(spec.total_params, 418);
    EXPECT_EQ(spec.layer_params, (std::vector<std::int64_t>{112, 272, 34}));
}

TEST(TinyModel, GradientsMatchFiniteDifferences) {
    const TinyModel m = TinyModel::make(default_dims(), 7);
    std::vector<Sample> batch;
    for (std::int64_t i = 0; i < 3; ++i) batch.push_back(make_sample(m.dims, 7, i));
    std::vector<std::vector<double>> grads;
    for (const auto& p : m.params) grads.emplace_back(p.size(), 0.0);
    accumulate_gradients(m.dims, m.params, batch, grads);
    const double h = 1e-6;
    double worst = 0;
    for (std::size_t l = 0; l < m.params.size(); ++l) {
        for (std::size_t i = 0; i < m.params[l].size(); i += 5) {
            auto plus = m.params, minus = m.params;
            plus[l][i] += h;
            minus[l][i] -= h;
            const double fd = (loss_of(m, plus, batch) - loss_of(m, minus, batch)) / (2 * h);
            worst = std::max(worst, std::fabs(fd - grads[l][i]) / std::max(1.0, std::fabs(fd)));
        }
    }
    EXPECT_LT(worst, 1e-6);
}

TEST(Samples, IndicesAreDistinctWithinAStep) {
    const TrainConfig c = config(4, 2, 3, 2);
    std::set<std::int64_t> seen;
    for (std::int64_t step = 0; step < 2; ++step) {
        for (std::int64_t mb = 0; mb < 3; ++mb) {
            for (std::int64_t r = 0; r < 4; ++r) {
                for (std::int64_t t = 0; t < c.samples_per_rank; ++t) seen.insert(sample_index(c, step, mb, r, t));
            }
        }
    }
    EXPECT_EQ(seen.size(), 2u * 3 * 4 * 2);
    const Sample a = make_sample(default_dims(), 42, 5), b = make_sample(default_dims(), 42, 5);
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.y, b.y);
}

TEST(Baseline, DeterministicAndPinned) {
    const TinyModel m = TinyModel::make(default_dims(), 42);
    const TrainConfig c = config(4, 2, 2, 10);
    const Snapshot a = run_baseline(m, c);
    const Snapshot b = run_baseline(m, c);
    EXPECT_EQ(snapshot_hash(a), snapshot_hash(b));
    EXPECT_EQ(snapshot_hash(a), 0x46e9e4cba7682748ULL);
    EXPECT_GT(max_abs_diff(a, m.params), 1e-3); // training moved the weights
}

TEST(Strategies, AllFirstPrincipleStrategiesMatchBaseline) {
    const TinyModel m = TinyModel::make(default_dims(), 42);
    const TrainConfig c = config(4, 2, 2, 20);
    const Snapshot base = run_baseline(m, c);
    for (const Strategy& s : filter_principle1(enumerate_all())) {
        const StrategyRun run = run_strategy(scheme_for(s), m, c);
        EXPECT_TRUE(run.failure.empty()) << s.code() << ": " << run.failure;
        EXPECT_TRUE(run.reduction_counts_ok) << s.code();
        EXPECT_TRUE(run.residency_ok) << s.code();
        EXPECT_LT(max_abs_diff(base, run.params), 1e-9) << s.code();
        EXPECT_GT(run.collectives, 0) << s.code();
    }
}

TEST(Strategies, OtherClusterShapes) {
    const TinyModel m = TinyModel::make(default_dims(), 3);
    for (auto [n, g, s] : std::vector<std::tuple<int, int, int>>{{6, 3, 3}, {8, 8, 1}, {8, 1, 2}, {2, 1, 1}, {12, 4, 2}}) {
        const TrainConfig c = config(n, g, s, 4);
        const Snapshot base = run_baseline(m, c);
        for (const char* code : {"NNN", "NNG", "IIG", "IGG", "NIG", "III", "INI", "GNG", "GGG"}) {
            const StrategyRun run = run_strategy(scheme_for(parse_strategy(code)), m, c);
            EXPECT_TRUE(run.failure.empty() && run.reduction_counts_ok && run.residency_ok)
                << code << " N=" << n << " M=" << g << ": " << run.failure;
            EXPECT_LT(max_abs_diff(base, run.params), 1e-9) << code << " N=" << n << " M=" << g;
        }
    }
}

TEST(Strategies, ZeroPlusPlusMatchesBaseline) {
    const TinyModel m = TinyModel::make(default_dims(), 42);
    const TrainConfig c = config(8, 4, 2, 5);
    const StrategyRun run = run_strategy(scheme_for(Method::ZeROPlusPlus), m, c);
    EXPECT_TRUE(run.failure.empty() && run.reduction_counts_ok && run.residency_ok) << run.failure;
    EXPECT_LT(max_abs_diff(run_baseline(m, c), run.params), 1e-9);
}

TEST(Diff, ShapeMismatchAndNanAreInfinite) {
    const Snapshot a{{1.0, 2.0}};
    EXPECT_EQ(max_abs_diff(a, Snapshot{{1.0}}), INFINITY);
    EXPECT_EQ(max_abs_diff(a, Snapshot{{1.0, NAN}}), INFINITY);
    EXPECT_EQ(max_abs_diff(a, a), 0.0);
}
