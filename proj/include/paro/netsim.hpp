// Copyright 2026 The PaRO Planner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "paro/core.hpp"
#include "paro/costmodel.hpp"
#include "paro/schedule.hpp"

namespace paro {

enum class LinkClass : std::uint8_t { Intra, Inter };
std::string_view link_class_name(LinkClass c);

// Ranks 0..N-1 in equal groups of M: rank r is in group r / M at position r % M.
class SimCluster {
public:
    explicit SimCluster(const ClusterSpec& spec);
    static SimCluster make(std::int64_t n_ranks, std::int64_t group_size);

    std::int64_t size() const { return spec_.n_gpus; }
    std::int64_t group_size() const { return spec_.group_size; }
    std::int64_t n_groups() const { return spec_.n_groups; }
    std::int64_t group_of(std::int64_t rank) const { return rank / spec_.group_size; }
    std::int64_t position_of(std::int64_t rank) const { return rank % spec_.group_size; }
    std::int64_t rank_of(std::int64_t group, std::int64_t position) const {
        return group * spec_.group_size + position;
    }
    LinkClass link(std::int64_t a, std::int64_t b) const {
        return group_of(a) == group_of(b) ? LinkClass::Intra : LinkClass::Inter;
    }
    const ClusterSpec& spec() const { return spec_; }

private:
    ClusterSpec spec_;
};

// Element ranges of a rank-local buffer. Source and destination use the same offsets.
struct Extent {
    std::int64_t offset = 0;
    std::int64_t count = 0;
};
using Block = std::vector<Extent>;
std::int64_t block_size(const Block& b);

struct Transfer {
    std::int64_t src = 0;
    std::int64_t dst = 0;
    Block block;
    bool accumulate = false;
};

// All transfers of a round read a snapshot taken before any of them writes.
using Round = std::vector<Transfer>;

struct Phase {
    std::string name;
    std::vector<Round> rounds;
};
using CollectiveSchedule = std::vector<Phase>;

struct Message {
    std::int64_t src = 0;
    std::int64_t dst = 0;
    std::int64_t elements = 0;
    double bytes = 0;
    LinkClass link = LinkClass::Intra;
};

struct TraceRound {
    std::int64_t index = 0;
    std::string phase;
    std::vector<Message> messages;
};

struct SimTrace {
    std::vector<TraceRound> rounds;
    double intra_bytes = 0;
    double inter_bytes = 0;
    std::int64_t intra_elements = 0;
    std::int64_t inter_elements = 0;
    // Rounds per phase name, in first-seen order.
    std::vector<std::pair<std::string, std::int64_t>> phase_steps;
    double simulated_time = 0;

    std::vector<RoundLoad> loads() const;
    // Bytes sent by each rank, split by link class.
    std::vector<double> sent_bytes(std::int64_t n_ranks, LinkClass c) const;
    std::vector<double> sent_bytes(std::int64_t n_ranks) const;
    void append(const SimTrace& other);
    // One JSON object per round.
    std::string to_jsonl() const;
};

// Builds the trace of a schedule without touching any data.
SimTrace trace_schedule(const SimCluster& cluster, const CollectiveSchedule& schedule, double bytes_per_element,
                        const NetworkSpec& net);

namespace detail {
void check_schedule_bounds(const CollectiveSchedule& schedule, std::int64_t n_ranks,
                           const std::vector<std::int64_t>& buffer_sizes);
}

// Executes a schedule on per-rank buffers of any copyable type with +=.
template <class T>
SimTrace run_schedule(const SimCluster& cluster, const CollectiveSchedule& schedule, std::vector<std::vector<T>>& buffers,
                      double bytes_per_element, const NetworkSpec& net) {
    std::vector<std::int64_t> sizes;
    sizes.reserve(buffers.size());
    for (const auto& b : buffers) sizes.push_back(static_cast<std::int64_t>(b.size()));
    detail::check_schedule_bounds(schedule, cluster.size(), sizes);
    std::vector<std::vector<T>> snapshot;
    for (const Phase& phase : schedule) {
        for (const Round& round : phase.rounds) {
            snapshot.assign(round.size(), {});
            for (std::size_t i = 0; i < round.size(); ++i) {
                const Transfer& t = round[i];
                const auto& src = buffers[static_cast<std::size_t>(t.src)];
                auto& out = snapshot[i];
                out.reserve(static_cast<std::size_t>(block_size(t.block)));
                for (const Extent& e : t.block) {
                    out.insert(out.end(), src.begin() + e.offset, src.begin() + e.offset + e.count);
                }
            }
            for (std::size_t i = 0; i < round.size(); ++i) {
                const Transfer& t = round[i];
                auto& dst = buffers[static_cast<std::size_t>(t.dst)];
                std::size_t k = 0;
                for (const Extent& e : t.block) {
                    for (std::int64_t j = 0; j < e.count; ++j, ++k) {
                        auto& slot = dst[static_cast<std::size_t>(e.offset + j)];
                        if (t.accumulate) {
                            slot += snapshot[i][k];
                        } else {
                            slot = snapshot[i][k];
                        }
                    }
                }
            }
        }
    }
    return trace_schedule(cluster, schedule, bytes_per_element, net);
}

// Rounds of concurrent rings. ring_members[k] lists ranks in ring order and
// blocks[k][i] is the block owned by (all-gather) or destined for (reduce-scatter)
// member i. Rings run concurrently; shorter rings idle once done.
struct RingSet {
    std::vector<std::vector<std::int64_t>> members;
    std::vector<std::vector<Block>> blocks;
};
std::vector<Round> ring_all_gather_rounds(const RingSet& rings);
std::vector<Round> ring_reduce_scatter_rounds(const RingSet& rings);
// Round-wise union of two round lists.
std::vector<Round> overlay(const std::vector<Round>& a, const std::vector<Round>& b);

// World collectives on buffers of N * chunk elements; rank r owns or receives segment r.
CollectiveSchedule ring_all_gather_schedule(const SimCluster& cluster, std::int64_t chunk);
CollectiveSchedule ring_reduce_scatter_schedule(const SimCluster& cluster, std::int64_t chunk);
CollectiveSchedule h_ring_all_gather_schedule(const SimCluster& cluster, std::int64_t chunk);
CollectiveSchedule ho_ring_all_gather_schedule(const SimCluster& cluster, std::int64_t chunk);
CollectiveSchedule ho_ring_reduce_scatter_schedule(const SimCluster& cluster, std::int64_t chunk);
CollectiveSchedule topology_schedule(Topology t, Collective c, const SimCluster& cluster, std::int64_t chunk);

// Segments of an N-segment buffer held at a residency by `rank`:
// N holds all, I holds {j'*M + p} over groups j', G holds segment r.
std::vector<std::int64_t> resident_segments(ShardLevel level, const SimCluster& cluster, std::int64_t rank);

// Ring collective of a plan op on buffers of N segments of `segment` elements each.
// An all-reduce is a reduce-scatter followed by an all-gather over the same rings.
CollectiveSchedule op_schedule(OpKind kind, Scope scope, const SimCluster& cluster, std::int64_t segment);

template <class T>
struct CollectiveResult {
    std::vector<std::vector<T>> buffers;
    SimTrace trace;
};

// Every rank ends with the rank-ordered concatenation of all shards.
template <class T>
CollectiveResult<T> all_gather(Topology topo, const SimCluster& cluster, const std::vector<std::vector<T>>& shards,
                               double bytes_per_element, const NetworkSpec& net) {
    if (static_cast<std::int64_t>(shards.size()) != cluster.size()) {
        throw ValidationError("need one shard per rank");
    }
    const std::int64_t c = static_cast<std::int64_t>(shards.front().size());
    CollectiveResult<T> out;
    out.buffers.assign(shards.size(), std::vector<T>(static_cast<std::size_t>(c * cluster.size()), T{}));
    for (std::size_t r = 0; r < shards.size(); ++r) {
        if (static_cast<std::int64_t>(shards[r].size()) != c) throw ValidationError("shard sizes differ");
        std::copy(shards[r].begin(), shards[r].end(), out.buffers[r].begin() + static_cast<std::int64_t>(r) * c);
    }
    out.trace = run_schedule(cluster, topology_schedule(topo, Collective::AllGather, cluster, c), out.buffers,
                             bytes_per_element, net);
    return out;
}

// Rank i ends holding segment i of the element-wise sum of all inputs.
template <class T>
CollectiveResult<T> reduce_scatter(Topology topo, const SimCluster& cluster, const std::vector<std::vector<T>>& inputs,
                                   double bytes_per_element, const NetworkSpec& net) {
    if (static_cast<std::int64_t>(inputs.size()) != cluster.size()) {
        throw ValidationError("need one input per rank");
    }
    const auto total = static_cast<std::int64_t>(inputs.front().size());
    for (const auto& in : inputs) {
        if (static_cast<std::int64_t>(in.size()) != total) throw ValidationError("input sizes differ");
    }
    if (total % cluster.size() != 0) throw ValidationError("input size must be a multiple of the rank count");
    const std::int64_t c = total / cluster.size();
    std::vector<std::vector<T>> work = inputs;
    CollectiveResult<T> out;
    out.trace = run_schedule(cluster, topology_schedule(topo, Collective::ReduceScatter, cluster, c), work,
                             bytes_per_element, net);
    for (std::int64_t r = 0; r < cluster.size(); ++r) {
        const auto& w = work[static_cast<std::size_t>(r)];
        out.buffers.emplace_back(w.begin() + r * c, w.begin() + (r + 1) * c);
    }
    return out;
}

struct ExecOptions {
    // Fuse intra+inter reduce-scatter pairs and inter+intra all-gather pairs into HO-Ring collectives.
    bool ho_fusion = false;
    NetworkSpec net;
    std::uint64_t seed = 1;
};

struct ExecResult {
    SimTrace trace;
    // Measured cluster-wide element counts, bucketed like the cost model.
    VolumeReport volumes;
    std::int64_t collectives = 0;
};

// Runs every op of the plan on synthetic integer payloads and checks each result
// against a direct computation. Throws std::logic_error on a mismatch and
// ValidationError if a payload is not a whole number of per-rank segments.
ExecResult execute_plan(const SimCluster& cluster, const SchedulePlan& plan, const ExecOptions& options);

} // namespace paro
