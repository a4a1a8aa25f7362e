// Copyright 2026 The PaRO Planner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/rational.hpp>

namespace paro {

// Exact parameter-count arithmetic. Volumes and shard sizes such as Psi/N are
// carried as fractions so analytic and counted values compare with ==.
using Quantity = boost::rational<std::int64_t>;
// Compare Quantity only with Quantity. Under C++20 rewritten comparisons,
// boost 1.74 `rational == int` recurses without end.

double to_double(const Quantity& q);
std::string to_string(const Quantity& q);

// Thrown for malformed user input (codes, cluster shapes, flags).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class ShardLevel : std::uint8_t { NoShard = 0, IntraGroup = 1, Global = 2 };

constexpr int rank(ShardLevel level) { return static_cast<int>(level); }
constexpr std::strong_ordering operator<=>(ShardLevel a, ShardLevel b) { return rank(a) <=> rank(b); }

char level_char(ShardLevel level);
std::string_view level_name(ShardLevel level);

// Residency of the three model-state components, rendered as a P/G/OS code.
struct Strategy {
    ShardLevel p = ShardLevel::NoShard;
    ShardLevel g = ShardLevel::NoShard;
    ShardLevel os = ShardLevel::NoShard;

    std::string code() const;
    bool uses_groups() const;

    friend bool operator==(const Strategy&, const Strategy&) = default;
};

Strategy parse_strategy(std::string_view code);

struct ClusterSpec {
    std::int64_t n_gpus = 1;      // N
    std::int64_t group_size = 1;  // M
    std::int64_t n_groups = 1;    // g = N / M
    std::int64_t accum_steps = 1; // s

    friend bool operator==(const ClusterSpec&, const ClusterSpec&) = default;
};

ClusterSpec validate_cluster(std::int64_t n_gpus, std::int64_t group_size, std::int64_t accum_steps);

enum class Regime : std::uint8_t { Full, PartialLarge, PartialSmall, PEFT };

inline constexpr std::array<Regime, 4> kAllRegimes{Regime::Full, Regime::PartialLarge, Regime::PartialSmall,
                                                   Regime::PEFT};

std::string_view regime_name(Regime regime);
Regime parse_regime(std::string_view name);

struct ModelSpec {
    std::int64_t total_params = 0;     // Psi
    std::int64_t trainable_params = 0; // Psi'
    std::int64_t param_bytes = 2;
    std::int64_t grad_bytes = 2;
    double optim_factor = 12.0;        // K, optimizer bytes per trainable parameter
    std::int64_t layers = 1;
    bool peft = false;
    // Optional explicit per-layer parameter counts; must sum to total_params.
    std::vector<std::int64_t> layer_params;

    Regime regime() const;
    // Parameters (and trainable parameters) of one layer.
    Quantity layer_total(std::int64_t layer) const;
    Quantity layer_trainable(std::int64_t layer) const;
};

ModelSpec make_model(std::int64_t total_params, std::int64_t trainable_params, std::int64_t layers = 1);
void validate_model(const ModelSpec& model);

// Two-tier network. Latencies are charged once per bulk-synchronous round.
struct NetworkSpec {
    double intra_bw = 600e9;       // bytes/s per intra-group link
    double inter_bw = 100e9;       // bytes/s per inter-group link
    double intra_latency = 10e-6;  // s per round
    double inter_latency = 150e-6; // s per round
};

void validate_network(const NetworkSpec& net);

// Parses integers written either plainly or in scientific notation ("7e9").
std::int64_t parse_count(std::string_view text);

} // namespace paro
