// Copyright 2026 The PaRO Planner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "paro/core.hpp"
#include "paro/costmodel.hpp"
#include "paro/schedule.hpp"

namespace paro {

using Json = nlohmann::ordered_json;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

// Result of one command. `config` holds every input that determines the output.
struct Report {
    std::string command;
    Json config;
    Json body;
    Table table;
    std::string trace_jsonl;
    // False when a check the command performs did not hold.
    bool passed = true;
};

enum class Format : std::uint8_t { Json, Csv, Table };
Format parse_format(std::string_view name);
std::string render(const Report& report, Format format);

Json to_json(const Quantity& q);
Json to_json(const ClusterSpec& c);
Json to_json(const ModelSpec& m);
Json to_json(const NetworkSpec& n);

Json plan_to_json(const SchedulePlan& plan);
// Accepts a bare plan object or a report whose body carries one under "plan".
SchedulePlan plan_from_json(const Json& j);

Report plan_report(Regime regime, const ModelSpec& model, const ClusterSpec& cluster, const NetworkSpec& net);
Report cost_report(const Scheme& scheme, const ClusterSpec& cluster, const ModelSpec& model, const NetworkSpec& net,
                   bool include_plan);
Report savings_report(const ClusterSpec& cluster, const ModelSpec& model);

// The eight published methods at 7e9 parameters on 64 GPUs in groups of 8 with 8 micro-batches.
ClusterSpec fig5_cluster();
ModelSpec fig5_model();
// Analytic volumes of every method, cross-checked against a simulated run of its plan.
Report fig5_report(const NetworkSpec& net, std::uint64_t seed);

struct SimulateRequest {
    Topology topology = Topology::Ring;
    Collective collective = Collective::AllGather;
    std::int64_t ranks = 2;
    std::int64_t group = 0; // 0: one group of all ranks
    std::int64_t bytes = 0; // total gathered (or reduced) buffer size
    std::uint64_t seed = 42;
    NetworkSpec net;
};
Report simulate_report(const SimulateRequest& req);

// Executes a serialized plan on the simulator and compares measured with counted volumes.
Report replay_report(const SchedulePlan& plan, const NetworkSpec& net, bool ho_fusion, std::uint64_t seed);

struct VerifyRequest {
    std::vector<Strategy> strategies;
    ClusterSpec cluster;
    std::int64_t steps = 20;
    std::uint64_t seed = 42;
    double tolerance = 1e-9;
};
Report verify_report(const VerifyRequest& req);

} // namespace paro
