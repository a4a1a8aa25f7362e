// Copyright 2026 The PaRO Planner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "paro/core.hpp"

namespace paro {

// Named sharding methods. The last eight have published per-stage volume rows.
enum class Method : std::uint8_t { DDP, ZeRO1, ZeRO2, ZeRO3, MiCS, ZeROPlusPlus, PaRO_IGG, PaRO_IIG, PaRO_NIG };

inline constexpr std::array<Method, 8> kTable3Methods{Method::ZeRO1, Method::ZeRO2,        Method::ZeRO3,
                                                      Method::MiCS,  Method::ZeROPlusPlus, Method::PaRO_IGG,
                                                      Method::PaRO_IIG, Method::PaRO_NIG};

std::string_view method_name(Method m);

// A concrete sharding scheme: a strategy code plus the ZeRO++-style secondary
// intra-group parameter replica when enabled.
struct Scheme {
    std::string name;
    Strategy strategy;
    bool secondary_param_shard = false;
    std::optional<Method> method;
};

Scheme scheme_for(Method m);
Scheme scheme_for(const Strategy& s);
// Accepts method names ("zero-3", "mics", "zero++", "paro-iig", ...) and bare codes ("IIG").
Scheme resolve_scheme(std::string_view name_or_code);
std::string valid_method_names();

struct MemoryReport {
    double p_bytes = 0;
    double g_bytes = 0;
    double os_bytes = 0;
    double total_bytes = 0;
};

MemoryReport memory(const Scheme& scheme, const ClusterSpec& cluster, const ModelSpec& model);

enum class Stage : std::uint8_t { Forward, Backward, Update };
std::string_view stage_name(Stage s);

// Per-collective columns of the per-stage volume breakdown.
enum class Column : std::uint8_t { ForwardGatherP, BackwardGatherP, BackwardReduceG, UpdateReduceG, UpdateGatherP };
inline constexpr std::array<Column, 5> kAllColumns{Column::ForwardGatherP, Column::BackwardGatherP,
                                                   Column::BackwardReduceG, Column::UpdateReduceG,
                                                   Column::UpdateGatherP};
std::string_view column_name(Column c);
Stage column_stage(Column c);
bool column_moves_params(Column c);

struct Split {
    Quantity intra{0};
    Quantity inter{0};

    Quantity total() const { return intra + inter; }
    Split& operator+=(const Split& o) {
        intra += o.intra;
        inter += o.inter;
        return *this;
    }
    friend bool operator==(const Split&, const Split&) = default;
};

// Cluster-wide volumes in parameter units.
struct VolumeReport {
    std::array<Split, 5> columns{};

    Split& at(Column c) { return columns[static_cast<std::size_t>(c)]; }
    const Split& at(Column c) const { return columns[static_cast<std::size_t>(c)]; }
    Split stage(Stage s) const;
    Split total() const;
    // Average per-GPU view.
    Split per_gpu(Column c, const ClusterSpec& cluster) const;

    friend bool operator==(const VolumeReport&, const VolumeReport&) = default;
};

VolumeReport scale(const VolumeReport& v, const Quantity& factor);

// Closed-form volumes for the eight published methods; other schemes are
// derived by counting their generated schedule.
VolumeReport comm_volume(const Scheme& scheme, const ClusterSpec& cluster, const ModelSpec& model);
VolumeReport comm_volume(Method m, const ClusterSpec& cluster, const ModelSpec& model);

// The published cells evaluated verbatim (full training, Psi for every cell).
VolumeReport table3_literal(Method m, const ClusterSpec& cluster, const ModelSpec& model);

struct Deviation {
    Method method;
    Column column;
    Split literal;
    Split modeled;
    std::string reason;
};

// Cells where the literal published row and the modeled volume disagree for this configuration.
std::vector<Deviation> table3_deviations(Method m, const ClusterSpec& cluster, const ModelSpec& model);

// Per-GPU parameters saved by the grouped two-step reduce-scatter under gradient accumulation.
Quantity accumulation_savings(const ClusterSpec& cluster, const ModelSpec& model);

// Busiest link of each class during one bulk-synchronous round; 0 means the class is idle.
struct RoundLoad {
    double intra_bytes = 0;
    double inter_bytes = 0;
};

double round_time(const RoundLoad& r, const NetworkSpec& net);
double estimate_time(std::span<const RoundLoad> rounds, const NetworkSpec& net);
// Bandwidth-only estimate from per-GPU average volumes, no latency term.
double estimate_time(const VolumeReport& volumes, const ClusterSpec& cluster, const ModelSpec& model,
                     const NetworkSpec& net);

enum class Topology : std::uint8_t { Ring, HRing, HORing };
enum class Collective : std::uint8_t { AllGather, ReduceScatter };
std::string_view topology_name(Topology t);
Topology parse_topology(std::string_view name);
std::string_view collective_name(Collective c);
Collective parse_collective(std::string_view name);

// Round loads of a world collective over N ranks in groups of M, each rank owning shard_bytes.
std::vector<RoundLoad> topology_rounds(Topology t, Collective c, std::int64_t n, std::int64_t m, double shard_bytes);
double topology_time(Topology t, Collective c, std::int64_t n, std::int64_t m, double shard_bytes,
                     const NetworkSpec& net);

} // namespace paro
