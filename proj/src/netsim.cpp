// Copyright 2026 The PaRO Planner Authors
// SPDX-License-Identifier: Apache-2.0

#include "paro/netsim.hpp"

#include <map>
#include <random>
#include <sstream>

#include "json.hpp"

namespace paro {

std::string_view link_class_name(LinkClass c) { return c == LinkClass::Intra ? "intra" : "inter"; }

SimCluster::SimCluster(const ClusterSpec& spec)
    : spec_(validate_cluster(spec.n_gpus, spec.group_size, spec.accum_steps)) {}

SimCluster SimCluster::make(std::int64_t n_ranks, std::int64_t group_size) {
    return SimCluster(validate_cluster(n_ranks, group_size, 1));
}

std::int64_t block_size(const Block& b) {
    std::int64_t n = 0;
    for (const Extent& e : b) n += e.count;
    return n;
}

namespace detail {

void check_schedule_bounds(const CollectiveSchedule& schedule, std::int64_t n_ranks,
                           const std::vector<std::int64_t>& buffer_sizes) {
    if (static_cast<std::int64_t>(buffer_sizes.size()) != n_ranks) {
        throw ValidationError("need one buffer per rank");
    }
    for (const Phase& phase : schedule) {
        for (const Round& round : phase.rounds) {
            for (const Transfer& t : round) {
                if (t.src < 0 || t.src >= n_ranks || t.dst < 0 || t.dst >= n_ranks || t.src == t.dst) {
                    throw std::logic_error("transfer " + std::to_string(t.src) + "->" + std::to_string(t.dst) +
                                           " is not between two distinct ranks");
                }
                for (const Extent& e : t.block) {
                    const auto limit = std::min(buffer_sizes[static_cast<std::size_t>(t.src)],
                                                buffer_sizes[static_cast<std::size_t>(t.dst)]);
                    if (e.offset < 0 || e.count < 0 || e.offset + e.count > limit) {
                        throw std::logic_error("transfer extent out of buffer bounds in phase " + phase.name);
                    }
                }
            }
        }
    }
}

} // namespace detail

SimTrace trace_schedule(const SimCluster& cluster, const CollectiveSchedule& schedule, double bytes_per_element,
                        const NetworkSpec& net) {
    SimTrace trace;
    std::int64_t index = 0;
    for (const Phase& phase : schedule) {
        if (phase.rounds.empty()) continue;
        trace.phase_steps.emplace_back(phase.name, static_cast<std::int64_t>(phase.rounds.size()));
        for (const Round& round : phase.rounds) {
            std::map<std::pair<std::int64_t, std::int64_t>, std::int64_t> per_pair;
            for (const Transfer& t : round) per_pair[{t.src, t.dst}] += block_size(t.block);
            TraceRound tr;
            tr.index = index++;
            tr.phase = phase.name;
            for (const auto& [pair, elements] : per_pair) {
                if (elements == 0) continue;
                Message m{pair.first, pair.second, elements, static_cast<double>(elements) * bytes_per_element,
                          cluster.link(pair.first, pair.second)};
                if (m.link == LinkClass::Intra) {
                    trace.intra_bytes += m.bytes;
                    trace.intra_elements += m.elements;
                } else {
                    trace.inter_bytes += m.bytes;
                    trace.inter_elements += m.elements;
                }
                tr.messages.push_back(m);
            }
            trace.rounds.push_back(std::move(tr));
        }
    }
    trace.simulated_time = estimate_time(trace.loads(), net);
    return trace;
}

std::vector<RoundLoad> SimTrace::loads() const {
    std::vector<RoundLoad> out;
    out.reserve(rounds.size());
    for (const TraceRound& r : rounds) {
        RoundLoad load;
        for (const Message& m : r.messages) {
            double& slot = m.link == LinkClass::Intra ? load.intra_bytes : load.inter_bytes;
            slot = std::max(slot, m.bytes);
        }
        out.push_back(load);
    }
    return out;
}

std::vector<double> SimTrace::sent_bytes(std::int64_t n_ranks, LinkClass c) const {
    std::vector<double> out(static_cast<std::size_t>(n_ranks), 0.0);
    for (const TraceRound& r : rounds) {
        for (const Message& m : r.messages) {
            if (m.link == c) out[static_cast<std::size_t>(m.src)] += m.bytes;
        }
    }
    return out;
}

std::vector<double> SimTrace::sent_bytes(std::int64_t n_ranks) const {
    std::vector<double> out = sent_bytes(n_ranks, LinkClass::Intra);
    const std::vector<double> inter = sent_bytes(n_ranks, LinkClass::Inter);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += inter[i];
    return out;
}

void SimTrace::append(const SimTrace& other) {
    const auto base = static_cast<std::int64_t>(rounds.size());
    for (TraceRound r : other.rounds) {
        r.index += base;
        rounds.push_back(std::move(r));
    }
    intra_bytes += other.intra_bytes;
    inter_bytes += other.inter_bytes;
    intra_elements += other.intra_elements;
    inter_elements += other.inter_elements;
    for (const auto& [name, steps] : other.phase_steps) {
        auto it = std::find_if(phase_steps.begin(), phase_steps.end(), [&](const auto& p) { return p.first == name; });
        if (it == phase_steps.end()) {
            phase_steps.emplace_back(name, steps);
        } else {
            it->second += steps;
        }
    }
    simulated_time += other.simulated_time;
}

std::string SimTrace::to_jsonl() const {
    std::ostringstream os;
    for (const TraceRound& r : rounds) {
        nlohmann::ordered_json j;
        j["round"] = r.index;
        j["phase"] = r.phase;
        auto msgs = nlohmann::ordered_json::array();
        for (const Message& m : r.messages) {
            msgs.push_back({{"src", m.src},
                            {"dst", m.dst},
                            {"elements", m.elements},
                            {"bytes", m.bytes},
                            {"link", link_class_name(m.link)}});
        }
        j["messages"] = std::move(msgs);
        os << j.dump() << '\n';
    }
    return os.str();
}

namespace {

std::int64_t wrap(std::int64_t i, std::int64_t n) { return ((i % n) + n) % n; }

std::vector<Round> ring_rounds(const RingSet& rings, bool reduce) {
    if (rings.members.size() != rings.blocks.size()) throw std::logic_error("ring set shape mismatch");
    std::size_t longest = 0;
    for (std::size_t k = 0; k < rings.members.size(); ++k) {
        if (rings.members[k].size() != rings.blocks[k].size()) throw std::logic_error("ring set shape mismatch");
        longest = std::max(longest, rings.members[k].size());
    }
    std::vector<Round> rounds;
    for (std::int64_t step = 0; step + 1 < static_cast<std::int64_t>(longest); ++step) {
        Round round;
        for (std::size_t k = 0; k < rings.members.size(); ++k) {
            const auto& members = rings.members[k];
            const auto n = static_cast<std::int64_t>(members.size());
            if (step + 1 >= n) continue;
            for (std::int64_t i = 0; i < n; ++i) {
                const std::int64_t b = reduce ? wrap(i - step - 1, n) : wrap(i - step, n);
                const Block& block = rings.blocks[k][static_cast<std::size_t>(b)];
                if (block_size(block) == 0) continue;
                round.push_back(Transfer{members[static_cast<std::size_t>(i)],
                                         members[static_cast<std::size_t>(wrap(i + 1, n))], block, reduce});
            }
        }
        rounds.push_back(std::move(round));
    }
    return rounds;
}

// Block covering the given segments, adjacent segments merged.
Block segments_block(const std::vector<std::int64_t>& segments, std::int64_t segment) {
    Block b;
    for (std::int64_t s : segments) {
        const std::int64_t off = s * segment;
        if (!b.empty() && b.back().offset + b.back().count == off) {
            b.back().count += segment;
        } else if (segment > 0) {
            b.push_back(Extent{off, segment});
        }
    }
    return b;
}

// One ring per group over its members; block_of(rank) gives the member's block.
template <class F>
RingSet group_rings(const SimCluster& c, F block_of) {
    RingSet rs;
    for (std::int64_t j = 0; j < c.n_groups(); ++j) {
        std::vector<std::int64_t> members;
        std::vector<Block> blocks;
        for (std::int64_t p = 0; p < c.group_size(); ++p) {
            members.push_back(c.rank_of(j, p));
            blocks.push_back(block_of(c.rank_of(j, p)));
        }
        rs.members.push_back(std::move(members));
        rs.blocks.push_back(std::move(blocks));
    }
    return rs;
}

// One ring per position across the groups.
template <class F>
RingSet position_rings(const SimCluster& c, F block_of) {
    RingSet rs;
    for (std::int64_t p = 0; p < c.group_size(); ++p) {
        std::vector<std::int64_t> members;
        std::vector<Block> blocks;
        for (std::int64_t j = 0; j < c.n_groups(); ++j) {
            members.push_back(c.rank_of(j, p));
            blocks.push_back(block_of(c.rank_of(j, p)));
        }
        rs.members.push_back(std::move(members));
        rs.blocks.push_back(std::move(blocks));
    }
    return rs;
}

template <class F>
RingSet world_ring(const SimCluster& c, F block_of) {
    RingSet rs;
    rs.members.emplace_back();
    rs.blocks.emplace_back();
    for (std::int64_t r = 0; r < c.size(); ++r) {
        rs.members[0].push_back(r);
        rs.blocks[0].push_back(block_of(r));
    }
    return rs;
}

// Segments of other groups at the rank's position.
std::vector<std::int64_t> foreign_position_segments(const SimCluster& c, std::int64_t rank) {
    std::vector<std::int64_t> out;
    for (std::int64_t j = 0; j < c.n_groups(); ++j) {
        if (j != c.group_of(rank)) out.push_back(c.rank_of(j, c.position_of(rank)));
    }
    return out;
}

} // namespace

std::vector<Round> ring_all_gather_rounds(const RingSet& rings) { return ring_rounds(rings, false); }
std::vector<Round> ring_reduce_scatter_rounds(const RingSet& rings) { return ring_rounds(rings, true); }

std::vector<Round> overlay(const std::vector<Round>& a, const std::vector<Round>& b) {
    std::vector<Round> out(std::max(a.size(), b.size()));
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (i < a.size()) out[i].insert(out[i].end(), a[i].begin(), a[i].end());
        if (i < b.size()) out[i].insert(out[i].end(), b[i].begin(), b[i].end());
    }
    return out;
}

CollectiveSchedule ring_all_gather_schedule(const SimCluster& c, std::int64_t chunk) {
    auto own = [&](std::int64_t r) { return segments_block({r}, chunk); };
    return {Phase{"ring", ring_all_gather_rounds(world_ring(c, own))}};
}

CollectiveSchedule ring_reduce_scatter_schedule(const SimCluster& c, std::int64_t chunk) {
    auto own = [&](std::int64_t r) { return segments_block({r}, chunk); };
    return {Phase{"ring", ring_reduce_scatter_rounds(world_ring(c, own))}};
}

CollectiveSchedule h_ring_all_gather_schedule(const SimCluster& c, std::int64_t chunk) {
    const std::int64_t m = c.group_size();
    const std::int64_t g = c.n_groups();
    auto own = [&](std::int64_t r) { return segments_block({r}, chunk); };
    CollectiveSchedule out;
    out.push_back(Phase{"intra", ring_all_gather_rounds(group_rings(c, own))});
    if (g < 2) return out;

    RingSet leaders;
    leaders.members.emplace_back();
    leaders.blocks.emplace_back();
    for (std::int64_t j = 0; j < g; ++j) {
        leaders.members[0].push_back(c.rank_of(j, 0));
        leaders.blocks[0].push_back(Block{Extent{j * m * chunk, m * chunk}});
    }
    out.push_back(Phase{"inter", ring_all_gather_rounds(leaders)});

    // The leader forwards the foreign groups' blocks down a ring through its group.
    Phase bcast{"broadcast", {}};
    for (std::int64_t k = 0; k + 1 < m; ++k) {
        Round round;
        for (std::int64_t j = 0; j < g; ++j) {
            Block foreign;
            if (j > 0) foreign.push_back(Extent{0, j * m * chunk});
            if (j + 1 < g) foreign.push_back(Extent{(j + 1) * m * chunk, (g - j - 1) * m * chunk});
            round.push_back(Transfer{c.rank_of(j, k), c.rank_of(j, k + 1), foreign, false});
        }
        bcast.rounds.push_back(std::move(round));
    }
    out.push_back(std::move(bcast));
    return out;
}

CollectiveSchedule ho_ring_all_gather_schedule(const SimCluster& c, std::int64_t chunk) {
    auto own = [&](std::int64_t r) { return segments_block({r}, chunk); };
    auto foreign = [&](std::int64_t r) { return segments_block(foreign_position_segments(c, r), chunk); };
    CollectiveSchedule out;
    out.push_back(Phase{"overlapped", overlay(ring_all_gather_rounds(group_rings(c, own)),
                                              ring_all_gather_rounds(position_rings(c, own)))});
    if (c.n_groups() >= 2) out.push_back(Phase{"completion", ring_all_gather_rounds(group_rings(c, foreign))});
    return out;
}

CollectiveSchedule ho_ring_reduce_scatter_schedule(const SimCluster& c, std::int64_t chunk) {
    auto own = [&](std::int64_t r) { return segments_block({r}, chunk); };
    auto foreign = [&](std::int64_t r) { return segments_block(foreign_position_segments(c, r), chunk); };
    CollectiveSchedule out;
    if (c.n_groups() >= 2) out.push_back(Phase{"completion", ring_reduce_scatter_rounds(group_rings(c, foreign))});
    out.push_back(Phase{"overlapped", overlay(ring_reduce_scatter_rounds(group_rings(c, own)),
                                              ring_reduce_scatter_rounds(position_rings(c, own)))});
    return out;
}

CollectiveSchedule topology_schedule(Topology t, Collective col, const SimCluster& c, std::int64_t chunk) {
    if (chunk < 1) throw ValidationError("chunk must be at least one element");
    switch (t) {
    case Topology::Ring:
        return col == Collective::AllGather ? ring_all_gather_schedule(c, chunk) : ring_reduce_scatter_schedule(c, chunk);
    case Topology::HRing:
        if (col != Collective::AllGather) throw ValidationError("h-ring is modeled for all-gather only");
        return h_ring_all_gather_schedule(c, chunk);
    case Topology::HORing:
        return col == Collective::AllGather ? ho_ring_all_gather_schedule(c, chunk)
                                            : ho_ring_reduce_scatter_schedule(c, chunk);
    }
    throw std::logic_error("unknown topology");
}

std::vector<std::int64_t> resident_segments(ShardLevel level, const SimCluster& c, std::int64_t rank) {
    std::vector<std::int64_t> out;
    switch (level) {
    case ShardLevel::NoShard:
        for (std::int64_t s = 0; s < c.size(); ++s) out.push_back(s);
        break;
    case ShardLevel::IntraGroup:
        for (std::int64_t j = 0; j < c.n_groups(); ++j) out.push_back(c.rank_of(j, c.position_of(rank)));
        break;
    case ShardLevel::Global: out.push_back(rank); break;
    }
    return out;
}

CollectiveSchedule op_schedule(OpKind kind, Scope scope, const SimCluster& c, std::int64_t segment) {
    RingSet rings;
    switch (scope) {
    case Scope::IntraGroup:
        rings = group_rings(c, [&](std::int64_t r) {
            return segments_block(resident_segments(ShardLevel::IntraGroup, c, r), segment);
        });
        break;
    case Scope::InterGroup:
        rings = position_rings(c, [&](std::int64_t r) { return segments_block({r}, segment); });
        break;
    case Scope::World:
        rings = world_ring(c, [&](std::int64_t r) { return segments_block({r}, segment); });
        break;
    }
    const std::string name(scope_name(scope));
    switch (kind) {
    case OpKind::AllGather: return {Phase{name + " all-gather", ring_all_gather_rounds(rings)}};
    case OpKind::ReduceScatter: return {Phase{name + " reduce-scatter", ring_reduce_scatter_rounds(rings)}};
    case OpKind::AllReduce:
        return {Phase{name + " reduce-scatter", ring_reduce_scatter_rounds(rings)},
                Phase{name + " all-gather", ring_all_gather_rounds(rings)}};
    }
    throw std::logic_error("unknown op kind");
}

namespace {

// One collective to execute: a plan op, or a fused HO-Ring pair.
struct ExecStep {
    OpKind kind;
    std::optional<Scope> scope; // empty for a fused world HO-Ring collective
    Quantity full_length;       // elements of the whole N-segment buffer
    Column column;
    Target target;
};

std::vector<ExecStep> exec_steps(const SchedulePlan& plan, bool fuse) {
    const Quantity M(plan.cluster.group_size);
    std::vector<ExecStep> steps;
    const auto& ops = plan.ops;
    for (std::size_t i = 0; i < ops.size(); ++i) {
        const CommOp& op = ops[i];
        if (fuse && i + 1 < ops.size()) {
            const CommOp& nx = ops[i + 1];
            const bool same_site = op.stage == nx.stage && op.layer == nx.layer && op.micro_batch == nx.micro_batch &&
                                   op.target == nx.target && op.kind == nx.kind;
            const bool rs_pair = same_site && op.kind == OpKind::ReduceScatter && op.scope == Scope::IntraGroup &&
                                 nx.scope == Scope::InterGroup && nx.payload * M == op.payload;
            const bool ag_pair = same_site && op.kind == OpKind::AllGather && op.scope == Scope::InterGroup &&
                                 nx.scope == Scope::IntraGroup && op.payload * M == nx.payload;
            if (rs_pair || ag_pair) {
                steps.push_back(ExecStep{op.kind, std::nullopt, rs_pair ? op.payload : nx.payload, op.column(),
                                         op.target});
                ++i;
                continue;
            }
        }
        const Quantity full = op.scope == Scope::InterGroup ? op.payload * M : op.payload;
        steps.push_back(ExecStep{op.kind, op.scope, full, op.column(), op.target});
    }
    return steps;
}

ShardLevel input_level(const ExecStep& s) {
    if (!s.scope) return s.kind == OpKind::AllGather ? ShardLevel::Global : ShardLevel::NoShard;
    return input_residency(s.kind, *s.scope);
}

ShardLevel output_level(const ExecStep& s) {
    if (!s.scope) return s.kind == OpKind::AllGather ? ShardLevel::NoShard : ShardLevel::Global;
    return residency_after(s.kind, *s.scope, input_level(s));
}

bool same_communicator(const SimCluster& c, const std::optional<Scope>& scope, std::int64_t a, std::int64_t b) {
    if (!scope || *scope == Scope::World) return true;
    if (*scope == Scope::IntraGroup) return c.group_of(a) == c.group_of(b);
    return c.position_of(a) == c.position_of(b);
}

} // namespace

ExecResult execute_plan(const SimCluster& cluster, const SchedulePlan& plan, const ExecOptions& options) {
    if (!(cluster.spec().n_gpus == plan.cluster.n_gpus && cluster.spec().group_size == plan.cluster.group_size)) {
        throw ValidationError("plan was generated for a different cluster shape");
    }
    const std::int64_t n = cluster.size();
    std::mt19937_64 rng(options.seed);
    std::uniform_int_distribution<std::int64_t> value(-1000, 1000);
    ExecResult result;

    for (const ExecStep& step : exec_steps(plan, options.ho_fusion)) {
        if (step.full_length.denominator() != 1 || step.full_length.numerator() % n != 0) {
            throw ValidationError("collective payload " + to_string(step.full_length) +
                                  " is not a whole number of per-rank segments for " + std::to_string(n) + " ranks");
        }
        const std::int64_t seg = step.full_length.numerator() / n;
        const std::size_t len = static_cast<std::size_t>(step.full_length.numerator());
        const ShardLevel in = input_level(step);
        const ShardLevel out = output_level(step);

        // Inputs: one shared vector for gathers, independent vectors for reductions.
        std::vector<std::vector<std::int64_t>> inputs(static_cast<std::size_t>(n), std::vector<std::int64_t>(len));
        for (auto& v : inputs) {
            for (auto& x : v) x = value(rng);
            if (step.kind == OpKind::AllGather) v = inputs.front();
        }
        std::vector<std::vector<std::int64_t>> buffers(static_cast<std::size_t>(n), std::vector<std::int64_t>(len, 0));
        for (std::int64_t r = 0; r < n; ++r) {
            for (std::int64_t s : resident_segments(in, cluster, r)) {
                const auto off = static_cast<std::ptrdiff_t>(s * seg);
                std::copy_n(inputs[static_cast<std::size_t>(r)].begin() + off, seg,
                            buffers[static_cast<std::size_t>(r)].begin() + off);
            }
        }

        const CollectiveSchedule schedule =
            step.scope ? op_schedule(step.kind, *step.scope, cluster, seg)
                       : topology_schedule(Topology::HORing,
                                           step.kind == OpKind::AllGather ? Collective::AllGather
                                                                          : Collective::ReduceScatter,
                                           cluster, seg);
        const double width =
            static_cast<double>(step.target == Target::P ? plan.model.param_bytes : plan.model.grad_bytes);
        const SimTrace trace = run_schedule(cluster, schedule, buffers, width, options.net);

        for (std::int64_t r = 0; r < n; ++r) {
            for (std::int64_t s : resident_segments(out, cluster, r)) {
                for (std::int64_t e = s * seg; e < (s + 1) * seg; ++e) {
                    std::int64_t expected = 0;
                    if (step.kind == OpKind::AllGather) {
                        expected = inputs[0][static_cast<std::size_t>(e)];
                    } else {
                        for (std::int64_t q = 0; q < n; ++q) {
                            if (same_communicator(cluster, step.scope, r, q)) {
                                expected += inputs[static_cast<std::size_t>(q)][static_cast<std::size_t>(e)];
                            }
                        }
                    }
                    if (buffers[static_cast<std::size_t>(r)][static_cast<std::size_t>(e)] != expected) {
                        throw std::logic_error("collective result mismatch at rank " + std::to_string(r) +
                                               ", element " + std::to_string(e));
                    }
                }
            }
        }

        Split& cell = result.volumes.at(step.column);
        cell.intra += Quantity(trace.intra_elements);
        cell.inter += Quantity(trace.inter_elements);
        result.trace.append(trace);
        ++result.collectives;
    }
    return result;
}

} // namespace paro
