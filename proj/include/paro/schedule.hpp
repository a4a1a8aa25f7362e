// Copyright 2026 The PaRO Planner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "paro/core.hpp"
#include "paro/costmodel.hpp"

namespace paro {

enum class OpKind : std::uint8_t { AllGather, ReduceScatter, AllReduce };
enum class Scope : std::uint8_t { IntraGroup, InterGroup, World };
enum class Target : std::uint8_t { P, G };

std::string_view op_kind_name(OpKind k);
std::string_view scope_name(Scope s);
std::string_view target_name(Target t);

struct CommOp {
    OpKind kind = OpKind::AllGather;
    Scope scope = Scope::World;
    // Elements in the whole buffer of one communicator: gather output, reduce input.
    Quantity payload{0};
    Stage stage = Stage::Forward;
    std::optional<std::int64_t> layer;
    std::optional<std::int64_t> micro_batch;
    Target target = Target::P;

    Column column() const;
    friend bool operator==(const CommOp&, const CommOp&) = default;
};

struct SchedulePlan {
    std::vector<CommOp> ops;
    Scheme scheme;
    // The strategy the plan realizes after single-group collapsing (I -> G when g = 1).
    Strategy strategy;
    ClusterSpec cluster;
    ModelSpec model;
    // True when the scheme is not one of the published rows the rules were validated against.
    bool extrapolated = false;
};

SchedulePlan generate(const Scheme& scheme, const ClusterSpec& cluster, const ModelSpec& model);
SchedulePlan generate(const Strategy& strategy, const ClusterSpec& cluster, const ModelSpec& model);

// Ranks in one communicator of the given scope.
std::int64_t comm_size(Scope scope, const ClusterSpec& cluster);

// Residency an op expects its buffer to start from.
ShardLevel input_residency(OpKind kind, Scope scope);

// Residency after applying an op to a buffer at `in`. Throws std::logic_error if the op
// does not apply to that residency.
ShardLevel residency_after(OpKind kind, Scope scope, ShardLevel in);

// Ring accounting: each member of a P-rank ring collective over payload D sends D(P-1)/P
// (twice for all-reduce). World rings put g/N of their traffic on group-boundary edges.
VolumeReport count_volumes(const SchedulePlan& plan);

// Analytic bulk-synchronous rounds of the plan, ops executed back to back on rings.
std::vector<RoundLoad> plan_rounds(const SchedulePlan& plan);
// estimate_time(plan_rounds(plan)) without materializing the rounds.
double plan_time(const SchedulePlan& plan, const NetworkSpec& net);

} // namespace paro
