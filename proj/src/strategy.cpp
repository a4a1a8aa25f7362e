// Copyright 2026 The PaRO Planner Authors
// SPDX-License-Identifier: Apache-2.0

#include "paro/strategy.hpp"

#include <algorithm>
#include <array>

namespace paro {

namespace {

struct MatrixRow {
    std::string_view code;
    std::string_view alias;
    // Columns: Full, PartialLarge, PartialSmall, PEFT.
    std::array<bool, 4> recommended;
};

// Recommendation matrix, stored verbatim. Some rows are pruned by dominance
// arguments that the three principles do not capture, so it is not derived.
constexpr std::array<MatrixRow, 14> kMatrix{{
    {"NNN", "DDP", {true, true, true, true}},
    {"NNI", "", {true, true, true, true}},
    {"NNG", "ZeRO-1", {true, true, true, false}},
    {"NII", "", {true, true, true, false}},
    {"NIG", "", {true, true, true, false}},
    {"NGG", "ZeRO-2", {true, true, true, false}},
    {"INI", "", {false, false, false, true}},
    {"ING", "", {false, true, true, false}},
    {"III", "MiCS", {false, false, true, false}},
    {"IIG", "", {true, true, false, false}},
    {"IGG", "", {true, true, true, false}},
    {"GNG", "", {false, true, true, true}},
    {"GIG", "", {false, true, true, false}},
    {"GGG", "ZeRO-3", {true, true, true, false}},
}};

const MatrixRow* find_row(const Strategy& s) {
    const std::string code = s.code();
    auto it = std::find_if(kMatrix.begin(), kMatrix.end(), [&](const MatrixRow& r) { return r.code == code; });
    return it == kMatrix.end() ? nullptr : &*it;
}

template <class Pred>
std::vector<Strategy> keep_if(std::span<const Strategy> in, Pred pred) {
    std::vector<Strategy> out;
    std::copy_if(in.begin(), in.end(), std::back_inserter(out), pred);
    return out;
}

bool principles_allow(const Strategy& s, Regime regime) {
    if (!principle1(s)) return false;
    switch (regime) {
    case Regime::Full:
    case Regime::PartialLarge: return principle2(s);
    case Regime::PartialSmall: return true;
    case Regime::PEFT: return principle3(s);
    }
    return false;
}

} // namespace

std::vector<Strategy> enumerate_all() {
    constexpr std::array<ShardLevel, 3> levels{ShardLevel::NoShard, ShardLevel::IntraGroup, ShardLevel::Global};
    std::vector<Strategy> out;
    out.reserve(27);
    for (ShardLevel p : levels)
        for (ShardLevel g : levels)
            for (ShardLevel os : levels) out.push_back(Strategy{p, g, os});
    return out;
}

bool principle1(const Strategy& s) { return s.os >= s.p && s.os >= s.g; }
bool principle2(const Strategy& s) { return s.p <= s.g && s.g <= s.os; }
bool principle3(const Strategy& s) { return s.g == ShardLevel::NoShard; }

std::vector<Strategy> filter_principle1(std::span<const Strategy> strategies) { return keep_if(strategies, principle1); }
std::vector<Strategy> filter_principle2(std::span<const Strategy> strategies) { return keep_if(strategies, principle2); }
std::vector<Strategy> filter_principle3(std::span<const Strategy> strategies) { return keep_if(strategies, principle3); }

bool table1_recommended(const Strategy& s, Regime regime) {
    const MatrixRow* row = find_row(s);
    if (row == nullptr) {
        throw ValidationError("strategy " + s.code() + " is not in the recommendation matrix (fails Principle 1)");
    }
    return row->recommended[static_cast<std::size_t>(regime)];
}

std::string_view strategy_alias(const Strategy& s) {
    const MatrixRow* row = find_row(s);
    return row == nullptr ? std::string_view{} : row->alias;
}

std::vector<Recommendation> recommend(Regime regime) {
    std::vector<Recommendation> out;
    const auto all = enumerate_all();
    for (const Strategy& s : filter_principle1(all)) {
        Recommendation r;
        r.strategy = s;
        r.regime = regime;
        r.recommended = table1_recommended(s, regime);
        r.source = RecommendationSource::Table1;
        r.passes_p1 = principle1(s);
        r.passes_p2 = principle2(s);
        r.passes_p3 = principle3(s);
        const bool allowed = principles_allow(s, regime);
        if (r.recommended && !allowed) {
            r.note = "recommended although it fails the principle filter for this regime";
        } else if (!r.recommended && allowed) {
            r.note = "passes the principle filter but is dominated by another strategy in this regime";
        }
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace paro
