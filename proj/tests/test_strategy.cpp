// Copyright 2026 The PaRO Planner Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <map>
#include <set>
#include <string>

#include "paro/strategy.hpp"

using namespace paro;

namespace {

std::vector<std::string> codes(const std::vector<Strategy>& v) {
    std::vector<std::string> out;
    for (const auto& s : v) out.push_back(s.code());
    return out;
}

std::vector<Strategy> parse_all(std::initializer_list<const char*> cs) {
    std::vector<Strategy> out;
    for (const char* c : cs) out.push_back(parse_strategy(c));
    return out;
}

// Recommendation matrix typed in from the published table: columns are
// Psi'=Psi, Psi'>=Psi/6, Psi'<Psi/6, PEFT.
const std::map<std::string, std::string>& published_matrix() {
    static const std::map<std::string, std::string> m{
        {"NNN", "1111"}, {"NNI", "1111"}, {"NNG", "1110"}, {"NII", "1110"}, {"NIG", "1110"},
        {"NGG", "1110"}, {"INI", "0001"}, {"ING", "0110"}, {"III", "0010"}, {"IIG", "1100"},
        {"IGG", "1110"}, {"GNG", "0111"}, {"GIG", "0110"}, {"GGG", "1110"},
    };
    return m;
}

} // namespace

TEST(Enumerate, TwentySevenInOrder) {
    const auto all = enumerate_all();
    ASSERT_EQ(all.size(), 27u);
    EXPECT_EQ(all.front().code(), "NNN");
    EXPECT_EQ(all.back().code(), "GGG");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < all.size(); ++i) {
        seen.insert(all[i].code());
        if (i > 0) {
            const auto& a = all[i - 1];
            const auto& b = all[i];
            EXPECT_TRUE(std::tie(a.p, a.g, a.os) < std::tie(b.p, b.g, b.os));
        }
    }
    EXPECT_EQ(seen.size(), 27u);
}

TEST(Principles, FirstKeepsFourteen) {
    const auto kept = filter_principle1(enumerate_all());
    const std::vector<std::string> expected{"NNN", "NNI", "NNG", "NII", "NIG", "NGG", "INI",
                                            "ING", "III", "IIG", "IGG", "GNG", "GIG", "GGG"};
    EXPECT_EQ(codes(kept), expected);
    EXPECT_TRUE(filter_principle1(parse_all({"GGN"})).empty());
    EXPECT_EQ(codes(filter_principle1(parse_all({"NNN"}))), std::vector<std::string>{"NNN"});
}

TEST(Principles, Second) {
    EXPECT_EQ(codes(filter_principle2(parse_all({"IGG", "GIG"}))), std::vector<std::string>{"IGG"});
    EXPECT_TRUE(filter_principle2(parse_all({"GNG"})).empty());
    EXPECT_EQ(codes(filter_principle2(parse_all({"GGG"}))), std::vector<std::string>{"GGG"});
}

TEST(Principles, Third) {
    EXPECT_EQ(codes(filter_principle3(parse_all({"INI", "III"}))), std::vector<std::string>{"INI"});
    const auto survivors = filter_principle1(enumerate_all());
    const auto third = filter_principle3(survivors);
    const std::vector<std::string> expected{"NNN", "NNI", "NNG", "INI", "ING", "GNG"};
    EXPECT_EQ(codes(third), expected);
    EXPECT_EQ(codes(filter_principle3(third)), expected);
}

TEST(Recommend, MatchesPublishedMatrixCellForCell) {
    int cells = 0;
    for (int col = 0; col < 4; ++col) {
        const Regime regime = kAllRegimes[static_cast<std::size_t>(col)];
        const auto recs = recommend(regime);
        ASSERT_EQ(recs.size(), 14u);
        for (const auto& r : recs) {
            const bool want = published_matrix().at(r.strategy.code())[static_cast<std::size_t>(col)] == '1';
            EXPECT_EQ(r.recommended, want) << r.strategy.code() << " column " << col;
            EXPECT_EQ(r.source, RecommendationSource::Table1);
            EXPECT_EQ(r.passes_p1, true);
            EXPECT_EQ(table1_recommended(r.strategy, regime), want);
            ++cells;
        }
    }
    EXPECT_EQ(cells, 56);
}

TEST(Recommend, FullColumnSatisfiesSecondPrinciple) {
    for (const auto& r : recommend(Regime::Full)) {
        if (r.recommended) {
            EXPECT_TRUE(principle2(r.strategy)) << r.strategy.code();
        }
    }
}

TEST(Recommend, PeftSet) {
    std::set<std::string> ticked;
    for (const auto& r : recommend(Regime::PEFT)) {
        if (r.recommended) ticked.insert(r.strategy.code());
    }
    EXPECT_EQ(ticked, (std::set<std::string>{"NNN", "NNI", "INI", "GNG"}));
}

TEST(Alias, KnownMethods) {
    EXPECT_EQ(strategy_alias(parse_strategy("NNN")), "DDP");
    EXPECT_EQ(strategy_alias(parse_strategy("III")), "MiCS");
    EXPECT_EQ(strategy_alias(parse_strategy("GGG")), "ZeRO-3");
    EXPECT_EQ(strategy_alias(parse_strategy("IIG")), "");
}
