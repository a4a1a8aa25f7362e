// Copyright 2026 The PaRO Planner Authors
// SPDX-License-Identifier: Apache-2.0

#include "paro/schedule.hpp"

namespace paro {

std::string_view op_kind_name(OpKind k) {
    switch (k) {
    case OpKind::AllGather: return "all-gather";
    case OpKind::ReduceScatter: return "reduce-scatter";
    case OpKind::AllReduce: return "all-reduce";
    }
    return "?";
}

std::string_view scope_name(Scope s) {
    switch (s) {
    case Scope::IntraGroup: return "intra-group";
    case Scope::InterGroup: return "inter-group";
    case Scope::World: return "world";
    }
    return "?";
}

std::string_view target_name(Target t) { return t == Target::P ? "P" : "G"; }

Column CommOp::column() const {
    switch (stage) {
    case Stage::Forward: return Column::ForwardGatherP;
    case Stage::Backward: return target == Target::P ? Column::BackwardGatherP : Column::BackwardReduceG;
    case Stage::Update: return target == Target::P ? Column::UpdateGatherP : Column::UpdateReduceG;
    }
    return Column::ForwardGatherP;
}

std::int64_t comm_size(Scope scope, const ClusterSpec& c) {
    switch (scope) {
    case Scope::IntraGroup: return c.group_size;
    case Scope::InterGroup: return c.n_groups;
    case Scope::World: return c.n_gpus;
    }
    return 1;
}

ShardLevel residency_after(OpKind kind, Scope scope, ShardLevel in) {
    using L = ShardLevel;
    auto expect = [&](L want, L out) {
        if (in != want) {
            throw std::logic_error(std::string(op_kind_name(kind)) + " over " + std::string(scope_name(scope)) +
                                   " cannot start from " + std::string(level_name(in)) + " residency");
        }
        return out;
    };
    switch (kind) {
    case OpKind::AllGather:
        switch (scope) {
        case Scope::IntraGroup: return expect(L::IntraGroup, L::NoShard);
        case Scope::InterGroup: return expect(L::Global, L::IntraGroup);
        case Scope::World: return expect(L::Global, L::NoShard);
        }
        break;
    case OpKind::ReduceScatter:
        switch (scope) {
        case Scope::IntraGroup: return expect(L::NoShard, L::IntraGroup);
        case Scope::InterGroup: return expect(L::IntraGroup, L::Global);
        case Scope::World: return expect(L::NoShard, L::Global);
        }
        break;
    case OpKind::AllReduce:
        switch (scope) {
        case Scope::IntraGroup: return expect(L::NoShard, L::NoShard);
        case Scope::InterGroup: return expect(L::IntraGroup, L::IntraGroup);
        case Scope::World: return expect(L::NoShard, L::NoShard);
        }
        break;
    }
    return in;
}

ShardLevel input_residency(OpKind kind, Scope scope) {
    switch (kind) {
    case OpKind::AllGather: return scope == Scope::IntraGroup ? ShardLevel::IntraGroup : ShardLevel::Global;
    case OpKind::ReduceScatter:
    case OpKind::AllReduce: return scope == Scope::InterGroup ? ShardLevel::IntraGroup : ShardLevel::NoShard;
    }
    return ShardLevel::NoShard;
}

namespace {

class PlanBuilder {
public:
    PlanBuilder(SchedulePlan& plan, bool grouped) : plan_(plan), grouped_(grouped) {}

    void emit(OpKind kind, Scope scope, const Quantity& payload, Stage stage, Target target,
              std::optional<std::int64_t> layer, std::optional<std::int64_t> micro_batch) {
        if (comm_size(scope, plan_.cluster) <= 1 || payload.numerator() == 0) return;
        plan_.ops.push_back(CommOp{kind, scope, payload, stage, layer, micro_batch, target});
    }

    // Gathers a component from `from` residency up to the coarser `to` residency.
    void widen(ShardLevel from, ShardLevel to, const Quantity& payload, Stage stage, Target target,
               std::optional<std::int64_t> layer, std::optional<std::int64_t> mb) {
        const Quantity M(plan_.cluster.group_size);
        ShardLevel res = from;
        while (res > to) {
            if (res == ShardLevel::Global) {
                if (grouped_) {
                    emit(OpKind::AllGather, Scope::InterGroup, payload / M, stage, target, layer, mb);
                    res = ShardLevel::IntraGroup;
                } else {
                    emit(OpKind::AllGather, Scope::World, payload, stage, target, layer, mb);
                    res = ShardLevel::NoShard;
                }
            } else {
                emit(OpKind::AllGather, Scope::IntraGroup, payload, stage, target, layer, mb);
                res = ShardLevel::NoShard;
            }
        }
    }

private:
    SchedulePlan& plan_;
    bool grouped_;
};

} // namespace

SchedulePlan generate(const Strategy& strategy, const ClusterSpec& cluster, const ModelSpec& model) {
    return generate(scheme_for(strategy), cluster, model);
}

SchedulePlan generate(const Scheme& scheme, const ClusterSpec& cluster, const ModelSpec& model) {
    validate_model(model);
    SchedulePlan plan;
    plan.scheme = scheme;
    plan.cluster = cluster;
    plan.model = model;
    plan.extrapolated = !scheme.method.has_value() || *scheme.method == Method::DDP;

    // With one group, intra-group sharding is global sharding.
    Strategy st = scheme.strategy;
    if (cluster.n_groups == 1) {
        for (ShardLevel* level : {&st.p, &st.g, &st.os}) {
            if (*level == ShardLevel::IntraGroup) *level = ShardLevel::Global;
        }
    }
    plan.strategy = st;
    const bool grouped = st.uses_groups();
    const Quantity M(cluster.group_size);
    PlanBuilder b(plan, grouped);

    auto gather_params = [&](Stage stage, std::int64_t layer, std::int64_t mb) {
        const Quantity payload = model.layer_total(layer);
        if (stage == Stage::Backward && scheme.secondary_param_shard && st.p == ShardLevel::Global) {
            // Secondary intra-group replica kept from the forward gather.
            const Scope scope = cluster.n_groups == 1 ? Scope::World : Scope::IntraGroup;
            b.emit(OpKind::AllGather, scope, payload, stage, Target::P, layer, mb);
            return;
        }
        b.widen(st.p, ShardLevel::NoShard, payload, stage, Target::P, layer, mb);
    };

    auto reduce_grads = [&](std::int64_t layer, std::int64_t mb) {
        const Quantity payload = model.layer_trainable(layer);
        switch (st.g) {
        case ShardLevel::NoShard: break;
        case ShardLevel::IntraGroup:
            b.emit(OpKind::ReduceScatter, Scope::IntraGroup, payload, Stage::Backward, Target::G, layer, mb);
            break;
        case ShardLevel::Global:
            if (grouped) {
                b.emit(OpKind::ReduceScatter, Scope::IntraGroup, payload, Stage::Backward, Target::G, layer, mb);
                b.emit(OpKind::ReduceScatter, Scope::InterGroup, payload / M, Stage::Backward, Target::G, layer, mb);
            } else {
                b.emit(OpKind::ReduceScatter, Scope::World, payload, Stage::Backward, Target::G, layer, mb);
            }
            break;
        }
    };

    // Brings the accumulated gradient to the optimizer residency, reduced over all ranks.
    auto reconcile_grads = [&](std::int64_t layer) {
        const Quantity payload = model.layer_trainable(layer);
        const std::optional<std::int64_t> no_mb;
        ShardLevel res = st.g;
        enum class Reduced { None, Group, All } reduced = st.g == ShardLevel::Global ? Reduced::All
                                                          : st.g == ShardLevel::IntraGroup ? Reduced::Group
                                                                                           : Reduced::None;
        if (reduced == Reduced::None) {
            if (grouped) {
                b.emit(OpKind::ReduceScatter, Scope::IntraGroup, payload, Stage::Update, Target::G, layer, no_mb);
                res = ShardLevel::IntraGroup;
                reduced = Reduced::Group;
            } else {
                // Flat replicated gradients: all-reduce, as data-parallel and ZeRO-1 do.
                b.emit(OpKind::AllReduce, Scope::World, payload, Stage::Update, Target::G, layer, no_mb);
                reduced = Reduced::All;
            }
        }
        if (reduced == Reduced::Group) {
            if (st.os == ShardLevel::Global) {
                b.emit(OpKind::ReduceScatter, Scope::InterGroup, payload / M, Stage::Update, Target::G, layer, no_mb);
                res = ShardLevel::Global;
            } else {
                b.emit(OpKind::AllReduce, Scope::InterGroup, payload / M, Stage::Update, Target::G, layer, no_mb);
            }
        }
        b.widen(res, st.os, payload, Stage::Update, Target::G, layer, no_mb);
    };

    const std::int64_t layers = model.layers;
    for (std::int64_t mb = 0; mb < cluster.accum_steps; ++mb) {
        for (std::int64_t l = 0; l < layers; ++l) gather_params(Stage::Forward, l, mb);
        for (std::int64_t l = layers - 1; l >= 0; --l) {
            gather_params(Stage::Backward, l, mb);
            reduce_grads(l, mb);
        }
    }
    for (std::int64_t l = 0; l < layers; ++l) {
        reconcile_grads(l);
        b.widen(st.os, st.p, model.layer_trainable(l), Stage::Update, Target::P, l, std::nullopt);
    }
    return plan;
}

VolumeReport count_volumes(const SchedulePlan& plan) {
    const ClusterSpec& c = plan.cluster;
    const Quantity N(c.n_gpus);
    const Quantity boundary(c.n_groups >= 2 ? c.n_groups : 0);
    VolumeReport v;
    for (const CommOp& op : plan.ops) {
        const Quantity members(comm_size(op.scope, c));
        Quantity total = N * op.payload * (members - 1) / members;
        if (op.kind == OpKind::AllReduce) total *= 2;
        Split& cell = v.at(op.column());
        switch (op.scope) {
        case Scope::IntraGroup: cell.intra += total; break;
        case Scope::InterGroup: cell.inter += total; break;
        case Scope::World:
            cell.inter += total * boundary / N;
            cell.intra += total * (N - boundary) / N;
            break;
        }
    }
    return v;
}

namespace {

// Round load of one op and how many rounds it takes.
std::pair<RoundLoad, std::int64_t> op_rounds(const CommOp& op, const SchedulePlan& plan) {
    const ClusterSpec& c = plan.cluster;
    const std::int64_t members = comm_size(op.scope, c);
    const double width = static_cast<double>(op.target == Target::P ? plan.model.param_bytes : plan.model.grad_bytes);
    const double chunk = to_double(op.payload) / static_cast<double>(members) * width;
    RoundLoad load;
    switch (op.scope) {
    case Scope::IntraGroup: load.intra_bytes = chunk; break;
    case Scope::InterGroup: load.inter_bytes = chunk; break;
    case Scope::World:
        if (c.group_size >= 2 || c.n_groups < 2) load.intra_bytes = chunk;
        if (c.n_groups >= 2) load.inter_bytes = chunk;
        break;
    }
    const std::int64_t count = (op.kind == OpKind::AllReduce ? 2 : 1) * (members - 1);
    return {load, count};
}

} // namespace

std::vector<RoundLoad> plan_rounds(const SchedulePlan& plan) {
    std::vector<RoundLoad> rounds;
    for (const CommOp& op : plan.ops) {
        const auto [load, count] = op_rounds(op, plan);
        rounds.insert(rounds.end(), static_cast<std::size_t>(count), load);
    }
    return rounds;
}

double plan_time(const SchedulePlan& plan, const NetworkSpec& net) {
    double t = 0;
    for (const CommOp& op : plan.ops) {
        const auto [load, count] = op_rounds(op, plan);
        t += static_cast<double>(count) * round_time(load, net);
    }
    return t;
}

} // namespace paro
