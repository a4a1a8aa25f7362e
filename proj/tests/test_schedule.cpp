// Copyright 2026 The PaRO Planner Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "paro/schedule.hpp"
#include "paro/strategy.hpp"

using namespace paro;

namespace {

using Q = Quantity;

CommOp op(OpKind k, Scope sc, Q payload, Stage st, Target t, std::optional<std::int64_t> layer,
          std::optional<std::int64_t> mb) {
    CommOp o;
    o.kind = k;
    o.scope = sc;
    o.payload = payload;
    o.stage = st;
    o.target = t;
    o.layer = layer;
    o.micro_batch = mb;
    return o;
}

std::string describe(const CommOp& o) {
    return std::string(op_kind_name(o.kind)) + "/" + std::string(scope_name(o.scope)) + "/" + to_string(o.payload) +
           "/" + std::string(stage_name(o.stage)) + "/" + std::string(target_name(o.target)) + "/L" +
           (o.layer ? std::to_string(*o.layer) : "-") + "/mb" + (o.micro_batch ? std::to_string(*o.micro_batch) : "-");
}

constexpr auto AG = OpKind::AllGather;
constexpr auto RS = OpKind::ReduceScatter;
constexpr auto AR = OpKind::AllReduce;
constexpr auto Intra = Scope::IntraGroup;
constexpr auto Inter = Scope::InterGroup;
constexpr auto World = Scope::World;

} // namespace

TEST(Generate, IigOrderAndPayloads) {
    // 8 ranks in 2 groups of 4, 2 layers of 2048, 2 micro-batches.
    const ClusterSpec cl = validate_cluster(8, 4, 2);
    const ModelSpec model = make_model(4096, 4096, 2);
    const SchedulePlan plan = generate(parse_strategy("IIG"), cl, model);
    const Q layer(2048), seg(512); // layer, and one position's slice of it across groups
    std::vector<CommOp> want;
    for (std::int64_t mb = 0; mb < 2; ++mb) {
        want.push_back(op(AG, Intra, layer, Stage::Forward, Target::P, 0, mb));
        want.push_back(op(AG, Intra, layer, Stage::Forward, Target::P, 1, mb));
        for (std::int64_t l = 1; l >= 0; --l) {
            want.push_back(op(AG, Intra, layer, Stage::Backward, Target::P, l, mb));
            want.push_back(op(RS, Intra, layer, Stage::Backward, Target::G, l, mb));
        }
    }
    for (std::int64_t l = 0; l < 2; ++l) {
        want.push_back(op(RS, Inter, seg, Stage::Update, Target::G, l, std::nullopt));
        want.push_back(op(AG, Inter, seg, Stage::Update, Target::P, l, std::nullopt));
    }
    ASSERT_EQ(plan.ops.size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
        EXPECT_EQ(plan.ops[i], want[i]) << i << ": " << describe(plan.ops[i]) << " vs " << describe(want[i]);
    }
    EXPECT_FALSE(plan.extrapolated);
}

TEST(Generate, NigGathersOnlyInUpdate) {
    const ClusterSpec cl = validate_cluster(8, 4, 3);
    const SchedulePlan plan = generate(parse_strategy("NIG"), cl, make_model(800, 800));
    std::vector<std::string> got;
    for (const auto& o : plan.ops) got.push_back(describe(o));
    const std::vector<std::string> want{
        "reduce-scatter/intra-group/800/backward/G/L0/mb0", "reduce-scatter/intra-group/800/backward/G/L0/mb1",
        "reduce-scatter/intra-group/800/backward/G/L0/mb2", "reduce-scatter/inter-group/200/update/G/L0/mb-",
        "all-gather/inter-group/200/update/P/L0/mb-",       "all-gather/intra-group/800/update/P/L0/mb-"};
    EXPECT_EQ(got, want);
}

TEST(Generate, FlatStrategies) {
    const ClusterSpec cl = validate_cluster(8, 4, 2);
    const ModelSpec model = make_model(800, 800);
    const auto ddp = generate(parse_strategy("NNN"), cl, model);
    ASSERT_EQ(ddp.ops.size(), 1u);
    EXPECT_EQ(ddp.ops[0], op(AR, World, Q(800), Stage::Update, Target::G, 0, std::nullopt));
    EXPECT_TRUE(ddp.extrapolated);

    const auto z3 = generate(parse_strategy("GGG"), cl, model);
    ASSERT_EQ(z3.ops.size(), 6u);
    for (const auto& o : z3.ops) EXPECT_EQ(o.scope, World);
}

TEST(Generate, ZeroPlusPlusGathersBackwardFromSecondaryShard) {
    const ClusterSpec cl = validate_cluster(8, 4, 1);
    const auto plan = generate(scheme_for(Method::ZeROPlusPlus), cl, make_model(800, 800));
    std::vector<std::string> got;
    for (const auto& o : plan.ops) got.push_back(describe(o));
    const std::vector<std::string> want{"all-gather/world/800/forward/P/L0/mb0",
                                        "all-gather/intra-group/800/backward/P/L0/mb0",
                                        "reduce-scatter/world/800/backward/G/L0/mb0"};
    EXPECT_EQ(got, want);
}

TEST(Generate, SingleGroupCollapsesIntraToGlobal) {
    const ClusterSpec cl = validate_cluster(8, 8, 2);
    const ModelSpec model = make_model(1600, 1600, 2);
    for (const Strategy& s : filter_principle1(enumerate_all())) {
        Strategy collapsed = s;
        for (ShardLevel* lv : {&collapsed.p, &collapsed.g, &collapsed.os}) {
            if (*lv == ShardLevel::IntraGroup) *lv = ShardLevel::Global;
        }
        const auto a = generate(s, cl, model);
        const auto b = generate(collapsed, cl, model);
        EXPECT_EQ(a.strategy, collapsed) << s.code();
        EXPECT_EQ(a.ops, b.ops) << s.code();
        for (const auto& o : a.ops) EXPECT_NE(o.scope, Inter) << s.code();
    }
}

TEST(Generate, GroupsOfOneDropIntraOps) {
    const ClusterSpec cl = validate_cluster(4, 1, 1);
    const auto plan = generate(parse_strategy("IIG"), cl, make_model(400, 400));
    for (const auto& o : plan.ops) EXPECT_NE(o.scope, Intra);
    const auto ddp = generate(parse_strategy("NNN"), validate_cluster(1, 1, 4), make_model(400, 400));
    EXPECT_TRUE(ddp.ops.empty());
}

TEST(Generate, PartialTrainingReducesOnlyTrainable) {
    const ClusterSpec cl = validate_cluster(8, 4, 1);
    const auto plan = generate(parse_strategy("IIG"), cl, make_model(800, 80));
    for (const auto& o : plan.ops) {
        if (o.target == Target::G) {
            EXPECT_EQ(o.payload, o.scope == Inter ? Q(20) : Q(80));
        } else if (o.stage != Stage::Update) {
            EXPECT_EQ(o.payload, Q(800));
        }
    }
}

TEST(Residency, Transitions) {
    using L = ShardLevel;
    EXPECT_EQ(residency_after(AG, Intra, L::IntraGroup), L::NoShard);
    EXPECT_EQ(residency_after(AG, Inter, L::Global), L::IntraGroup);
    EXPECT_EQ(residency_after(AG, World, L::Global), L::NoShard);
    EXPECT_EQ(residency_after(RS, Intra, L::NoShard), L::IntraGroup);
    EXPECT_EQ(residency_after(RS, Inter, L::IntraGroup), L::Global);
    EXPECT_EQ(residency_after(RS, World, L::NoShard), L::Global);
    EXPECT_EQ(residency_after(AR, World, L::NoShard), L::NoShard);
    EXPECT_EQ(residency_after(AR, Inter, L::IntraGroup), L::IntraGroup);
    EXPECT_THROW(residency_after(AG, Intra, L::Global), std::logic_error);
    EXPECT_THROW(residency_after(RS, World, L::IntraGroup), std::logic_error);
    EXPECT_EQ(input_residency(AG, Intra), L::IntraGroup);
    EXPECT_EQ(input_residency(AG, World), L::Global);
    EXPECT_EQ(input_residency(RS, Inter), L::IntraGroup);
    EXPECT_EQ(input_residency(AR, World), L::NoShard);
}

TEST(Residency, EveryPlanChainsItsOps) {
    // Every op applies to the residency it declares and actually moves data.
    const ClusterSpec cl = validate_cluster(16, 4, 2);
    const ModelSpec model = make_model(3200, 3200, 2);
    for (const Strategy& s : filter_principle1(enumerate_all())) {
        const auto plan = generate(s, cl, model);
        for (const auto& o : plan.ops) {
            EXPECT_NO_THROW(residency_after(o.kind, o.scope, input_residency(o.kind, o.scope))) << s.code();
            EXPECT_GT(comm_size(o.scope, cl), 1) << s.code();
            EXPECT_GT(o.payload, Q(0)) << s.code();
        }
    }
}

TEST(Count, MatchesNamedClosedForms) {
    const ClusterSpec configs[] = {validate_cluster(64, 8, 8), validate_cluster(16, 4, 2), validate_cluster(12, 3, 3),
                                   validate_cluster(8, 8, 2), validate_cluster(8, 1, 2)};
    for (const auto& cl : configs) {
        const ModelSpec model = make_model(7'000'000'000, 7'000'000'000, 3);
        for (Method m : kTable3Methods) {
            EXPECT_EQ(count_volumes(generate(scheme_for(m), cl, model)), comm_volume(m, cl, model))
                << method_name(m) << " N=" << cl.n_gpus << " M=" << cl.group_size;
        }
    }
}

TEST(Count, RingAccounting) {
    const ClusterSpec cl = validate_cluster(8, 4, 1);
    SchedulePlan plan;
    plan.cluster = cl;
    plan.ops = {op(AG, Intra, Q(400), Stage::Forward, Target::P, 0, 0)};
    // Two intra rings of 4, each member receives 300.
    EXPECT_EQ(count_volumes(plan).at(Column::ForwardGatherP), (Split{Q(2 * 4 * 300), Q(0)}));
    plan.ops = {op(AR, Inter, Q(100), Stage::Update, Target::G, 0, std::nullopt)};
    // Four inter rings of 2, each member sends 50 twice.
    EXPECT_EQ(count_volumes(plan).at(Column::UpdateReduceG), (Split{Q(0), Q(4 * 2 * 50 * 2)}));
    plan.ops = {op(RS, World, Q(800), Stage::Backward, Target::G, 0, 0)};
    // One ring of 8 moving 700 in total per 800, 2 of the 8 hops cross groups.
    EXPECT_EQ(count_volumes(plan).at(Column::BackwardReduceG), (Split{Q(5600 * 6 / 8), Q(5600 * 2 / 8)}));
}

TEST(Rounds, CountsAndTime) {
    const ClusterSpec cl = validate_cluster(8, 4, 1);
    const auto plan = generate(parse_strategy("IIG"), cl, make_model(800, 800));
    const auto rounds = plan_rounds(plan);
    // Forward AG, backward AG and RS in groups of 4 (3 rounds each); inter RS and AG in pairs (1 round each).
    EXPECT_EQ(rounds.size(), 3u * 3 + 2);
    NetworkSpec net;
    EXPECT_DOUBLE_EQ(plan_time(plan, net), estimate_time(rounds, net));
}
