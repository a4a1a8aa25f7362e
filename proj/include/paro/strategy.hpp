// Copyright 2026 The PaRO Planner Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "paro/core.hpp"

namespace paro {

enum class RecommendationSource : std::uint8_t { Table1, PrincipleFilter };

struct Recommendation {
    Strategy strategy;
    Regime regime = Regime::Full;
    bool recommended = false;
    RecommendationSource source = RecommendationSource::Table1;
    bool passes_p1 = false;
    bool passes_p2 = false;
    bool passes_p3 = false;
    // Why the published verdict differs from what the principles alone would give, if it does.
    std::string note;
};

// All 27 strategies, lexicographic with N < I < G in each position.
std::vector<Strategy> enumerate_all();

// OS at least as finely sharded as both P and G.
bool principle1(const Strategy& s);
// P no finer than G, G no finer than OS. Meant for Psi' >= Psi/6.
bool principle2(const Strategy& s);
// Gradients unsharded. Meant for PEFT.
bool principle3(const Strategy& s);

std::vector<Strategy> filter_principle1(std::span<const Strategy> strategies);
std::vector<Strategy> filter_principle2(std::span<const Strategy> strategies);
std::vector<Strategy> filter_principle3(std::span<const Strategy> strategies);

// The 14 Principle-1 strategies with the published recommendation for one regime column.
std::vector<Recommendation> recommend(Regime regime);

// Published verdict for one cell; throws ValidationError for strategies outside the 14-row set.
bool table1_recommended(const Strategy& s, Regime regime);

// Alias used in the published matrix ("DDP", "ZeRO-1", "MiCS", ...), empty if none.
std::string_view strategy_alias(const Strategy& s);

} // namespace paro
