// Copyright 2026 The PaRO Planner Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "paro/core.hpp"

using namespace paro;

TEST(Strategy, ParsesCodes) {
    const Strategy s = parse_strategy("IIG");
    EXPECT_EQ(s.p, ShardLevel::IntraGroup);
    EXPECT_EQ(s.g, ShardLevel::IntraGroup);
    EXPECT_EQ(s.os, ShardLevel::Global);
    EXPECT_EQ(s.code(), "IIG");
    EXPECT_TRUE(s.uses_groups());
    EXPECT_FALSE(parse_strategy("NGG").uses_groups());
}

TEST(Strategy, RejectsBadCodes) {
    EXPECT_THROW(parse_strategy("XYZ"), ValidationError);
    EXPECT_THROW(parse_strategy("II"), ValidationError);
    EXPECT_THROW(parse_strategy("iig"), ValidationError);
    EXPECT_THROW(parse_strategy("IIGG"), ValidationError);
}

TEST(ShardLevel, OrderedByWidth) {
    EXPECT_LT(ShardLevel::NoShard, ShardLevel::IntraGroup);
    EXPECT_LT(ShardLevel::IntraGroup, ShardLevel::Global);
}

TEST(Cluster, Validates) {
    const ClusterSpec c = validate_cluster(64, 8, 8);
    EXPECT_EQ(c.n_groups, 8);
    EXPECT_THROW(validate_cluster(64, 7, 1), ValidationError);
    EXPECT_THROW(validate_cluster(0, 1, 1), ValidationError);
    EXPECT_THROW(validate_cluster(8, 0, 1), ValidationError);
    EXPECT_THROW(validate_cluster(8, 2, 0), ValidationError);
    EXPECT_EQ(validate_cluster(8, 8, 1).n_groups, 1);
    EXPECT_EQ(validate_cluster(8, 1, 1).n_groups, 8);
}

TEST(Regime, Classifies) {
    EXPECT_EQ(make_model(600, 600).regime(), Regime::Full);
    EXPECT_EQ(make_model(600, 100).regime(), Regime::PartialLarge); // exactly Psi/6
    EXPECT_EQ(make_model(600, 99).regime(), Regime::PartialSmall);
    ModelSpec m = make_model(600, 600);
    m.peft = true;
    EXPECT_EQ(m.regime(), Regime::PEFT);
    EXPECT_EQ(parse_regime("partial-large"), Regime::PartialLarge);
    EXPECT_THROW(parse_regime("mostly"), ValidationError);
}

TEST(Model, LayersSplitExactly) {
    ModelSpec m = make_model(10, 5, 3);
    EXPECT_EQ(m.layer_total(0), Quantity(10, 3));
    EXPECT_EQ(m.layer_trainable(2), Quantity(5, 3));
    m.layer_params = {2, 3, 5};
    validate_model(m);
    EXPECT_EQ(m.layer_total(2), Quantity(5));
    m.layer_params = {2, 3, 4};
    EXPECT_THROW(validate_model(m), ValidationError);
    EXPECT_THROW(make_model(5, 6), ValidationError);
}

TEST(ParseCount, AcceptsScientificNotation) {
    EXPECT_EQ(parse_count("7e9"), 7'000'000'000);
    EXPECT_EQ(parse_count("1024"), 1024);
    EXPECT_EQ(parse_count("4.9e10"), 49'000'000'000);
    EXPECT_THROW(parse_count("1.5"), ValidationError);
    EXPECT_THROW(parse_count("ten"), ValidationError);
    EXPECT_THROW(parse_count(""), ValidationError);
}

TEST(Network, Validates) {
    NetworkSpec n;
    validate_network(n);
    n.inter_bw = 0;
    EXPECT_THROW(validate_network(n), ValidationError);
}
