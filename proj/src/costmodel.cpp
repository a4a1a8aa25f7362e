// Copyright 2026 The PaRO Planner Authors
// SPDX-License-Identifier: Apache-2.0

#include "paro/costmodel.hpp"

#include <algorithm>
#include <cctype>

#include "paro/schedule.hpp"

namespace paro {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::toupper(c); });
    return out;
}

Quantity divisor(ShardLevel level, const ClusterSpec& c) {
    switch (level) {
    case ShardLevel::NoShard: return Quantity(1);
    case ShardLevel::IntraGroup: return Quantity(c.group_size);
    case ShardLevel::Global: return Quantity(c.n_gpus);
    }
    return Quantity(1);
}

// Symbols of the published formulas. `b` is the number of group-boundary
// edges on the rank-ordered world ring: g when g >= 2, none otherwise.
struct Symbols {
    Quantity N, M, g, s, b, P, T;

    Symbols(const ClusterSpec& c, const ModelSpec& m, bool literal)
        : N(c.n_gpus), M(c.group_size), g(c.n_groups), s(c.accum_steps),
          b(literal || c.n_groups >= 2 ? c.n_groups : 0), P(m.total_params),
          T(literal ? m.total_params : m.trainable_params) {}

    // Flat world ring collective repeated `times`, payload X: g/N of edges cross groups.
    Split world(const Quantity& times, const Quantity& x) const {
        return {(N - b) * times * (x / N) * (N - 1), b * times * (x / N) * (N - 1)};
    }
    Split intra(const Quantity& v) const { return {v, Quantity(0)}; }
    Split inter(const Quantity& v) const { return {Quantity(0), v}; }
};

std::string_view deviation_reason(Method m, Column c) {
    if (m == Method::PaRO_IGG && c == Column::UpdateGatherP) {
        return "the update-stage inter-group parameter all-gather runs once per mini-batch; the published cell "
               "carries an extra factor s";
    }
    if (m == Method::PaRO_NIG && c == Column::BackwardReduceG) {
        return "the intra-group gradient reduce-scatter runs for every micro-batch; the published cell omits the "
               "factor s";
    }
    if (m == Method::MiCS && c == Column::UpdateReduceG) {
        return "a ring all-reduce of each Psi/M shard across the g groups moves 2*Psi*(g-1) parameters, all on "
               "inter-group links; the published cell is g/M times that on inter links plus an intra-link share";
    }
    return "published cell differs from ring accounting for this configuration";
}

} // namespace

std::string_view method_name(Method m) {
    switch (m) {
    case Method::DDP: return "DDP";
    case Method::ZeRO1: return "ZeRO-1";
    case Method::ZeRO2: return "ZeRO-2";
    case Method::ZeRO3: return "ZeRO-3";
    case Method::MiCS: return "MiCS";
    case Method::ZeROPlusPlus: return "ZeRO++";
    case Method::PaRO_IGG: return "PaRO-IGG";
    case Method::PaRO_IIG: return "PaRO-IIG";
    case Method::PaRO_NIG: return "PaRO-NIG";
    }
    return "?";
}

Scheme scheme_for(Method m) {
    static constexpr std::array<std::string_view, 9> codes{"NNN", "NNG", "NGG", "GGG", "III",
                                                           "GGG", "IGG", "IIG", "NIG"};
    Scheme s;
    s.name = std::string(method_name(m));
    s.strategy = parse_strategy(codes[static_cast<std::size_t>(m)]);
    s.secondary_param_shard = m == Method::ZeROPlusPlus;
    s.method = m;
    return s;
}

Scheme scheme_for(const Strategy& st) {
    for (Method m : {Method::DDP, Method::ZeRO1, Method::ZeRO2, Method::ZeRO3, Method::MiCS, Method::PaRO_IGG,
                     Method::PaRO_IIG, Method::PaRO_NIG}) {
        Scheme named = scheme_for(m);
        if (named.strategy == st) return named;
    }
    return Scheme{"PaRO-" + st.code(), st, false, std::nullopt};
}

std::string valid_method_names() {
    return "ddp, zero-1, zero-2, zero-3, mics, zero++, paro-igg, paro-iig, paro-nig, paro-<PGO code>, or a bare "
           "P/G/OS code such as IIG";
}

Scheme resolve_scheme(std::string_view name_or_code) {
    const std::string key = lower(name_or_code);
    if (key == "ddp") return scheme_for(Method::DDP);
    if (key == "zero-1" || key == "zero1") return scheme_for(Method::ZeRO1);
    if (key == "zero-2" || key == "zero2") return scheme_for(Method::ZeRO2);
    if (key == "zero-3" || key == "zero3") return scheme_for(Method::ZeRO3);
    if (key == "mics") return scheme_for(Method::MiCS);
    if (key == "zero++" || key == "zeropp") return scheme_for(Method::ZeROPlusPlus);
    std::string_view code = name_or_code;
    if (key.rfind("paro-", 0) == 0) code.remove_prefix(5);
    if (code.size() == 3) {
        try {
            return scheme_for(parse_strategy(upper(code)));
        } catch (const ValidationError&) {
        }
    }
    throw ValidationError("unknown method '" + std::string(name_or_code) + "'; valid names: " + valid_method_names());
}

MemoryReport memory(const Scheme& scheme, const ClusterSpec& cluster, const ModelSpec& model) {
    const Strategy& st = scheme.strategy;
    Quantity p = Quantity(model.param_bytes * model.total_params) / divisor(st.p, cluster);
    if (scheme.secondary_param_shard) {
        p += Quantity(model.param_bytes * model.total_params, cluster.group_size);
    }
    const Quantity g = Quantity(model.grad_bytes * model.trainable_params) / divisor(st.g, cluster);
    const Quantity os = Quantity(model.trainable_params) / divisor(st.os, cluster);

    MemoryReport r;
    r.p_bytes = to_double(p);
    r.g_bytes = to_double(g);
    r.os_bytes = model.optim_factor * to_double(os);
    r.total_bytes = r.p_bytes + r.g_bytes + r.os_bytes;
    return r;
}

std::string_view stage_name(Stage s) {
    switch (s) {
    case Stage::Forward: return "forward";
    case Stage::Backward: return "backward";
    case Stage::Update: return "update";
    }
    return "?";
}

std::string_view column_name(Column c) {
    switch (c) {
    case Column::ForwardGatherP: return "forward.all_gather_p";
    case Column::BackwardGatherP: return "backward.all_gather_p";
    case Column::BackwardReduceG: return "backward.reduce_scatter_g";
    case Column::UpdateReduceG: return "update.reduce_g";
    case Column::UpdateGatherP: return "update.all_gather_p";
    }
    return "?";
}

Stage column_stage(Column c) {
    switch (c) {
    case Column::ForwardGatherP: return Stage::Forward;
    case Column::BackwardGatherP:
    case Column::BackwardReduceG: return Stage::Backward;
    case Column::UpdateReduceG:
    case Column::UpdateGatherP: return Stage::Update;
    }
    return Stage::Update;
}

bool column_moves_params(Column c) { return c != Column::BackwardReduceG && c != Column::UpdateReduceG; }

Split VolumeReport::stage(Stage s) const {
    Split out;
    for (Column c : kAllColumns) {
        if (column_stage(c) == s) out += at(c);
    }
    return out;
}

Split VolumeReport::total() const {
    Split out;
    for (const Split& s : columns) out += s;
    return out;
}

Split VolumeReport::per_gpu(Column c, const ClusterSpec& cluster) const {
    const Quantity n(cluster.n_gpus);
    return {at(c).intra / n, at(c).inter / n};
}

VolumeReport scale(const VolumeReport& v, const Quantity& factor) {
    VolumeReport out = v;
    for (Split& s : out.columns) {
        s.intra *= factor;
        s.inter *= factor;
    }
    return out;
}

namespace {

// Shared body of the modeled and literal rows; `literal` switches to the cells as published.
VolumeReport table3_rows(Method m, const ClusterSpec& cluster, const ModelSpec& model, bool literal) {
    const Symbols x(cluster, model, literal);
    const Quantity& N = x.N;
    const Quantity& M = x.M;
    const Quantity& g = x.g;
    const Quantity& s = x.s;
    const Quantity& P = x.P;
    const Quantity& T = x.T;
    const Quantity one(1);
    const Quantity two(2);

    VolumeReport v;
    switch (m) {
    case Method::ZeRO1:
        v.at(Column::UpdateReduceG) = x.world(two, T);
        v.at(Column::UpdateGatherP) = x.world(one, T);
        break;
    case Method::ZeRO2:
        v.at(Column::BackwardReduceG) = x.world(s, T);
        v.at(Column::UpdateGatherP) = x.world(one, T);
        break;
    case Method::ZeRO3:
        v.at(Column::ForwardGatherP) = x.world(s, P);
        v.at(Column::BackwardGatherP) = x.world(s, P);
        v.at(Column::BackwardReduceG) = x.world(s, T);
        break;
    case Method::MiCS:
        v.at(Column::ForwardGatherP) = x.intra(N * s * (P / M) * (M - 1));
        v.at(Column::BackwardGatherP) = x.intra(N * s * (P / M) * (M - 1));
        v.at(Column::BackwardReduceG) = x.intra(N * s * (T / M) * (M - 1));
        if (literal) {
            v.at(Column::UpdateReduceG) = {two * (N - g) * (T / M) * (g - 1), two * g * (T / M) * (g - 1)};
        } else {
            v.at(Column::UpdateReduceG) = x.inter(two * N * (T / N) * (g - 1));
        }
        break;
    case Method::ZeROPlusPlus:
        v.at(Column::ForwardGatherP) = x.world(s, P);
        v.at(Column::BackwardGatherP) = x.intra(N * s * (P / M) * (M - 1));
        v.at(Column::BackwardReduceG) = x.world(s, T);
        break;
    case Method::PaRO_IGG:
        v.at(Column::ForwardGatherP) = x.intra(N * s * (P / M) * (M - 1));
        v.at(Column::BackwardGatherP) = x.intra(N * s * (P / M) * (M - 1));
        v.at(Column::BackwardReduceG) = {N * s * (T / M) * (M - 1), N * s * (T / N) * (g - 1)};
        v.at(Column::UpdateGatherP) = x.inter((literal ? s : one) * N * (T / N) * (g - 1));
        break;
    case Method::PaRO_IIG:
        v.at(Column::ForwardGatherP) = x.intra(N * s * (P / M) * (M - 1));
        v.at(Column::BackwardGatherP) = x.intra(N * s * (P / M) * (M - 1));
        v.at(Column::BackwardReduceG) = x.intra(N * s * (T / M) * (M - 1));
        v.at(Column::UpdateReduceG) = x.inter(N * (T / N) * (g - 1));
        v.at(Column::UpdateGatherP) = x.inter(N * (T / N) * (g - 1));
        break;
    case Method::PaRO_NIG:
        v.at(Column::BackwardReduceG) = x.intra((literal ? one : s) * N * (T / M) * (M - 1));
        v.at(Column::UpdateReduceG) = x.inter(N * (T / N) * (g - 1));
        v.at(Column::UpdateGatherP) = {N * (T / M) * (M - 1), N * (T / N) * (g - 1)};
        break;
    case Method::DDP:
        throw ValidationError("DDP has no published per-stage volume row");
    }
    return v;
}

} // namespace

VolumeReport comm_volume(Method m, const ClusterSpec& cluster, const ModelSpec& model) {
    if (m == Method::DDP) return comm_volume(scheme_for(m), cluster, model);
    return table3_rows(m, cluster, model, false);
}

VolumeReport comm_volume(const Scheme& scheme, const ClusterSpec& cluster, const ModelSpec& model) {
    if (scheme.method && *scheme.method != Method::DDP) return comm_volume(*scheme.method, cluster, model);
    return count_volumes(generate(scheme, cluster, model));
}

VolumeReport table3_literal(Method m, const ClusterSpec& cluster, const ModelSpec& model) {
    return table3_rows(m, cluster, model, true);
}

std::vector<Deviation> table3_deviations(Method m, const ClusterSpec& cluster, const ModelSpec& model) {
    std::vector<Deviation> out;
    if (m == Method::DDP) return out;
    const VolumeReport lit = table3_literal(m, cluster, model);
    const VolumeReport mod = comm_volume(m, cluster, model);
    for (Column c : kAllColumns) {
        if (lit.at(c) == mod.at(c)) continue;
        std::string reason(deviation_reason(m, c));
        if (model.trainable_params != model.total_params) {
            reason = "published cells assume full training (Psi' = Psi)";
        } else if (cluster.n_groups < 2 && reason.rfind("published cell differs", 0) == 0) {
            reason = "with a single group no ring edge crosses a group boundary";
        }
        out.push_back(Deviation{m, c, lit.at(c), mod.at(c), std::move(reason)});
    }
    return out;
}

Quantity accumulation_savings(const ClusterSpec& c, const ModelSpec& model) {
    return Quantity(model.total_params) * Quantity(c.accum_steps - 1) * Quantity(c.n_groups - 1) /
           Quantity(c.n_gpus);
}

double round_time(const RoundLoad& r, const NetworkSpec& net) {
    double t = 0;
    if (r.intra_bytes > 0) t = std::max(t, net.intra_latency + r.intra_bytes / net.intra_bw);
    if (r.inter_bytes > 0) t = std::max(t, net.inter_latency + r.inter_bytes / net.inter_bw);
    return t;
}

double estimate_time(std::span<const RoundLoad> rounds, const NetworkSpec& net) {
    double t = 0;
    for (const RoundLoad& r : rounds) t += round_time(r, net);
    return t;
}

double estimate_time(const VolumeReport& volumes, const ClusterSpec& cluster, const ModelSpec& model,
                     const NetworkSpec& net) {
    double t = 0;
    for (Column c : kAllColumns) {
        const double width = static_cast<double>(column_moves_params(c) ? model.param_bytes : model.grad_bytes);
        const Split per = volumes.per_gpu(c, cluster);
        t += to_double(per.intra) * width / net.intra_bw + to_double(per.inter) * width / net.inter_bw;
    }
    return t;
}

std::string_view topology_name(Topology t) {
    switch (t) {
    case Topology::Ring: return "ring";
    case Topology::HRing: return "h-ring";
    case Topology::HORing: return "ho-ring";
    }
    return "?";
}

Topology parse_topology(std::string_view name) {
    for (Topology t : {Topology::Ring, Topology::HRing, Topology::HORing}) {
        if (topology_name(t) == name) return t;
    }
    throw ValidationError("unknown topology '" + std::string(name) + "' (expected ring, h-ring or ho-ring)");
}

std::string_view collective_name(Collective c) {
    return c == Collective::AllGather ? "all-gather" : "reduce-scatter";
}

Collective parse_collective(std::string_view name) {
    if (name == "all-gather") return Collective::AllGather;
    if (name == "reduce-scatter") return Collective::ReduceScatter;
    throw ValidationError("unknown collective '" + std::string(name) + "' (expected all-gather or reduce-scatter)");
}

std::vector<RoundLoad> topology_rounds(Topology t, Collective c, std::int64_t n, std::int64_t m, double shard_bytes) {
    if (n < 1 || m < 1 || n % m != 0) throw ValidationError("group size must divide rank count");
    const std::int64_t g = n / m;
    const double C = shard_bytes;
    std::vector<RoundLoad> rounds;
    auto push = [&](std::int64_t count, RoundLoad load) {
        for (std::int64_t i = 0; i < count; ++i) rounds.push_back(load);
    };

    switch (t) {
    case Topology::Ring:
        push(n - 1, RoundLoad{m >= 2 || g < 2 ? C : 0, g >= 2 ? C : 0});
        break;
    case Topology::HRing:
        if (c != Collective::AllGather) throw ValidationError("h-ring is modeled for all-gather only");
        push(m - 1, RoundLoad{C, 0});
        if (g >= 2) {
            push(g - 1, RoundLoad{0, static_cast<double>(m) * C});
            push(m - 1, RoundLoad{static_cast<double>((g - 1) * m) * C, 0});
        }
        break;
    case Topology::HORing: {
        std::vector<RoundLoad> overlapped;
        for (std::int64_t r = 0; r < std::max(m - 1, g - 1); ++r) {
            overlapped.push_back(RoundLoad{r < m - 1 ? C : 0, r < g - 1 ? C : 0});
        }
        std::vector<RoundLoad> completion;
        if (g >= 2) {
            for (std::int64_t r = 0; r < m - 1; ++r) completion.push_back(RoundLoad{static_cast<double>(g - 1) * C, 0});
        }
        // Reduce-scatter runs the completion ring first.
        if (c == Collective::AllGather) {
            rounds = overlapped;
            rounds.insert(rounds.end(), completion.begin(), completion.end());
        } else {
            rounds = completion;
            rounds.insert(rounds.end(), overlapped.begin(), overlapped.end());
        }
        break;
    }
    }
    return rounds;
}

double topology_time(Topology t, Collective c, std::int64_t n, std::int64_t m, double shard_bytes,
                     const NetworkSpec& net) {
    const auto rounds = topology_rounds(t, c, n, m, shard_bytes);
    return estimate_time(rounds, net);
}

} // namespace paro
