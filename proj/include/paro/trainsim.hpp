// Copyright 2026 The PaRO Planner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "paro/core.hpp"
#include "paro/costmodel.hpp"

namespace paro {

// Dense tanh MLP in double precision. Layer l holds W (out x in, row-major) then b.
struct TinyModel {
    std::vector<std::int64_t> dims;
    std::vector<std::vector<double>> params;

    static TinyModel make(std::vector<std::int64_t> dims, std::uint64_t seed);

    std::int64_t n_layers() const { return static_cast<std::int64_t>(params.size()); }
    std::int64_t param_count() const;
    // Model description for the planner, one plan layer per dense layer.
    ModelSpec spec() const;
};

std::vector<std::int64_t> default_dims();

struct AdamConfig {
    double lr = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct TrainConfig {
    ClusterSpec cluster;
    std::int64_t steps = 20;
    std::uint64_t seed = 42;
    // Samples each rank processes per micro-batch.
    std::int64_t samples_per_rank = 2;
    AdamConfig adam;
};

struct Sample {
    std::vector<double> x;
    std::vector<double> y;
};

// Sample `index` of the synthetic regression stream.
Sample make_sample(const std::vector<std::int64_t>& dims, std::uint64_t seed, std::int64_t index);

// Global index of the t-th sample of `rank` in micro-batch `mb` of `step`.
std::int64_t sample_index(const TrainConfig& cfg, std::int64_t step, std::int64_t mb, std::int64_t rank,
                          std::int64_t t);

// Sum over samples of 0.5 * |f(x) - y|^2; gradients are summed into `grads` (same shape as params).
double accumulate_gradients(const std::vector<std::int64_t>& dims, const std::vector<std::vector<double>>& params,
                            const std::vector<Sample>& batch, std::vector<std::vector<double>>& grads);

using Snapshot = std::vector<std::vector<double>>;

// Single-process training with s micro-batches per step, gradients divided by the global batch.
Snapshot run_baseline(const TinyModel& model, const TrainConfig& cfg);

struct StrategyRun {
    Snapshot params;
    // Every gradient element reached the optimizer reduced over each rank exactly s times per step.
    bool reduction_counts_ok = true;
    // After every update each rank held exactly the parameter shards its strategy declares.
    bool residency_ok = true;
    std::string failure;
    std::int64_t collectives = 0;
};

// Trains on N simulated ranks executing the generated plan with ring collectives on real buffers.
StrategyRun run_strategy(const Scheme& scheme, const TinyModel& model, const TrainConfig& cfg);

double max_abs_diff(const Snapshot& a, const Snapshot& b);
// FNV-1a over the IEEE-754 bytes of every parameter.
std::uint64_t snapshot_hash(const Snapshot& s);

} // namespace paro
