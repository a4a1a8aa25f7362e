// Copyright 2026 The PaRO Planner Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>

#include "paro/netsim.hpp"
#include "paro/report.hpp"
#include "paro/strategy.hpp"
#include "paro/trainsim.hpp"

using namespace paro;

namespace {

using Q = Quantity;

struct Outcome {
    bool ok = true;
    std::string detail;
    void check(bool cond, const std::string& what) {
        if (!cond && ok) detail = what;
        ok = ok && cond;
    }
};

// 1. Strategy space and the recommendation matrix.
Outcome strategy_space() {
    Outcome o;
    const auto all = enumerate_all();
    o.check(all.size() == 27, "enumeration size");
    const auto p1 = filter_principle1(all);
    std::string joined;
    for (const auto& s : p1) joined += s.code() + " ";
    o.check(joined == "NNN NNI NNG NII NIG NGG INI ING III IIG IGG GNG GIG GGG ", "first-principle survivors: " + joined);
    // Psi'=Psi, Psi'>=Psi/6, Psi'<Psi/6, PEFT.
    const std::map<std::string, std::string> table{
        {"NNN", "1111"}, {"NNI", "1111"}, {"NNG", "1110"}, {"NII", "1110"}, {"NIG", "1110"},
        {"NGG", "1110"}, {"INI", "0001"}, {"ING", "0110"}, {"III", "0010"}, {"IIG", "1100"},
        {"IGG", "1110"}, {"GNG", "0111"}, {"GIG", "0110"}, {"GGG", "1110"}};
    int cells = 0;
    const Regime cols[] = {Regime::Full, Regime::PartialLarge, Regime::PartialSmall, Regime::PEFT};
    for (int c = 0; c < 4; ++c) {
        for (const auto& r : recommend(cols[c])) {
            const bool want = table.at(r.strategy.code())[static_cast<std::size_t>(c)] == '1';
            o.check(r.recommended == want, "cell " + r.strategy.code() + " column " + std::to_string(c));
            ++cells;
        }
    }
    o.check(cells == 56, "cell count " + std::to_string(cells));
    o.detail = o.ok ? "27 strategies, 14 survivors, 56/56 cells" : o.detail;
    return o;
}

// Elements sent per GPU by one op on the simulator.
Q sent_per_gpu(OpKind kind, Scope scope, const SimCluster& cl, std::int64_t segment) {
    const SimTrace t = trace_schedule(cl, op_schedule(kind, scope, cl, segment), 1.0, NetworkSpec{});
    return Q(t.intra_elements + t.inter_elements, cl.size());
}

// 2. Gradient-accumulation savings.
Outcome savings() {
    Outcome o;
    const Q big = accumulation_savings(validate_cluster(64, 8, 8), make_model(7'000'000'000, 7'000'000'000));
    o.check(big == Q(5'359'375'000), "closed form gave " + to_string(big));

    const std::int64_t psi = 64'000, n = 8, m = 2, s = 4;
    const SimCluster cl = SimCluster::make(n, m);
    const std::int64_t seg = psi / n;
    const Q global = Q(s) * sent_per_gpu(OpKind::ReduceScatter, Scope::World, cl, seg);
    const Q grouped = Q(s) * sent_per_gpu(OpKind::ReduceScatter, Scope::IntraGroup, cl, seg) +
                      sent_per_gpu(OpKind::ReduceScatter, Scope::InterGroup, cl, seg);
    const Q measured = global - grouped;
    const Q closed = accumulation_savings(validate_cluster(n, m, s), make_model(psi, psi));
    // Psi (s-1)(g-1) / N with g = 4.
    const Q hand = Q(psi * (s - 1) * (n / m - 1), n);
    o.check(measured == hand && closed == hand,
            "simulated " + to_string(measured) + ", closed form " + to_string(closed) + ", expected " + to_string(hand));
    if (o.ok) o.detail = "5359375000 exact; scaled simulated difference " + to_string(measured) + " = closed form";
    return o;
}

// 3. Published volume rows against schedule counts and simulated runs.
Outcome volumes() {
    Outcome o;
    const ClusterSpec cl = fig5_cluster();
    const ModelSpec model = fig5_model();
    const std::int64_t scaled = 512;
    const ModelSpec small = make_model(scaled, scaled, 1);
    const SimCluster sim(cl);
    int flagged = 0;
    for (Method meth : kTable3Methods) {
        const std::string name(method_name(meth));
        const Scheme scheme = scheme_for(meth);
        const VolumeReport analytic = comm_volume(meth, cl, model);
        const VolumeReport counted = count_volumes(generate(scheme, cl, model));
        ExecOptions opts;
        opts.seed = 11;
        const VolumeReport measured =
            scale(execute_plan(sim, generate(scheme, cl, small), opts).volumes, Q(model.total_params, scaled));
        o.check(analytic == counted, name + ": schedule count differs");
        o.check(analytic == measured, name + ": simulated volume differs");
        const VolumeReport literal = table3_literal(meth, cl, model);
        const auto devs = table3_deviations(meth, cl, model);
        for (Column c : kAllColumns) {
            const bool differs = !(literal.at(c) == analytic.at(c));
            bool listed = false;
            for (const auto& d : devs) listed = listed || d.column == c;
            o.check(differs == listed, name + " " + std::string(column_name(c)) + ": deviation not flagged");
        }
        flagged += static_cast<int>(devs.size());
    }
    if (o.ok) o.detail = "8 methods, analytic = scheduled = simulated; " + std::to_string(flagged) + " published cells flagged";
    return o;
}

// 4. Memory rows at three cluster shapes, and the published orderings.
Outcome memory_rows() {
    Outcome o;
    const double k = 12;
    for (auto [n, m] : std::vector<std::pair<double, double>>{{64, 8}, {32, 4}, {48, 6}}) {
        const double psi = 7e9;
        const std::map<Method, std::array<double, 3>> rows{
            {Method::ZeRO1, {2 * psi, 2 * psi, k * psi / n}},
            {Method::ZeRO2, {2 * psi, 2 * psi / n, k * psi / n}},
            {Method::ZeRO3, {2 * psi / n, 2 * psi / n, k * psi / n}},
            {Method::MiCS, {2 * psi / m, 2 * psi / m, k * psi / m}},
            {Method::ZeROPlusPlus, {2 * psi / n + 2 * psi / m, 2 * psi / n, k * psi / n}},
            {Method::PaRO_IGG, {2 * psi / m, 2 * psi / n, k * psi / n}},
            {Method::PaRO_IIG, {2 * psi / m, 2 * psi / m, k * psi / n}},
            {Method::PaRO_NIG, {2 * psi, 2 * psi / m, k * psi / n}}};
        const ClusterSpec cl = validate_cluster(static_cast<std::int64_t>(n), static_cast<std::int64_t>(m), 1);
        for (const auto& [meth, row] : rows) {
            const MemoryReport r = memory(scheme_for(meth), cl, make_model(7'000'000'000, 7'000'000'000));
            o.check(r.p_bytes == row[0] && r.g_bytes == row[1] && r.os_bytes == row[2],
                    std::string(method_name(meth)) + " at N=" + std::to_string(n));
        }
    }
    const ClusterSpec cl = fig5_cluster();
    const ModelSpec model = fig5_model();
    auto mem = [&](Method meth) { return memory(scheme_for(meth), cl, model).total_bytes; };
    auto inter = [&](Method meth) { return comm_volume(meth, cl, model).total().inter; };
    for (Method meth : {Method::PaRO_IGG, Method::PaRO_IIG, Method::ZeROPlusPlus}) {
        o.check(mem(Method::MiCS) > mem(meth) && mem(meth) > mem(Method::ZeRO3),
                "memory ordering at " + std::string(method_name(meth)));
    }
    const Method grouped[] = {Method::MiCS, Method::ZeROPlusPlus, Method::PaRO_IGG, Method::PaRO_IIG, Method::PaRO_NIG};
    for (Method meth : grouped) {
        o.check(inter(Method::MiCS) <= inter(meth) && inter(Method::PaRO_IIG) <= inter(meth),
                "inter volume ordering at " + std::string(method_name(meth)));
    }
    if (o.ok) o.detail = "24 rows at 3 shapes; MiCS > {IGG, IIG, ZeRO++} > ZeRO-3; MiCS, IIG minimal inter";
    return o;
}

// 5. Every collective variant against brute force on every shape.
Outcome collectives() {
    Outcome o;
    const NetworkSpec net;
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::int64_t> d(-(1LL << 40), 1LL << 40);
    int runs = 0;
    for (std::int64_t n : {2, 4, 6, 8, 9, 12, 16, 32}) {
        for (std::int64_t m = 1; m <= n; ++m) {
            if (n % m != 0) continue;
            const SimCluster cl = SimCluster::make(n, m);
            const std::int64_t g = n / m;
            for (std::int64_t c : {1, 2, 5}) {
                const std::string shape = " N=" + std::to_string(n) + " M=" + std::to_string(m);
                std::vector<std::vector<std::int64_t>> shards(static_cast<std::size_t>(n), std::vector<std::int64_t>(static_cast<std::size_t>(c)));
                for (auto& s : shards) {
                    for (auto& x : s) x = d(rng);
                }
                std::vector<std::int64_t> cat;
                for (const auto& s : shards) cat.insert(cat.end(), s.begin(), s.end());
                for (Topology t : {Topology::Ring, Topology::HRing, Topology::HORing}) {
                    const auto res = all_gather(t, cl, shards, 1.0, net);
                    for (const auto& b : res.buffers) o.check(b == cat, std::string(topology_name(t)) + " all-gather" + shape);
                    const auto sent = res.trace.sent_bytes(n);
                    const auto inter = res.trace.sent_bytes(n, LinkClass::Inter);
                    for (std::int64_t r = 0; r < n && t != Topology::HRing; ++r) {
                        o.check(sent[static_cast<std::size_t>(r)] == static_cast<double>((n - 1) * c),
                                std::string(topology_name(t)) + " send total" + shape);
                        if (t == Topology::HORing) {
                            o.check(inter[static_cast<std::size_t>(r)] == static_cast<double>((g - 1) * c),
                                    "ho-ring inter share" + shape);
                        }
                    }
                    ++runs;
                }
                std::vector<std::vector<std::int64_t>> in(static_cast<std::size_t>(n), std::vector<std::int64_t>(static_cast<std::size_t>(n * c)));
                for (auto& v : in) {
                    for (auto& x : v) x = d(rng);
                }
                for (Topology t : {Topology::Ring, Topology::HORing}) {
                    const auto res = reduce_scatter(t, cl, in, 1.0, net);
                    for (std::int64_t r = 0; r < n; ++r) {
                        for (std::int64_t e = 0; e < c; ++e) {
                            std::int64_t sum = 0;
                            for (const auto& v : in) sum += v[static_cast<std::size_t>(r * c + e)];
                            o.check(res.buffers[static_cast<std::size_t>(r)][static_cast<std::size_t>(e)] == sum,
                                    std::string(topology_name(t)) + " reduce-scatter" + shape);
                        }
                    }
                    ++runs;
                }
            }
        }
    }
    if (o.ok) o.detail = std::to_string(runs) + " runs over 5 variants, all exact";
    return o;
}

// 6. Simulated ordering of the three all-gather topologies.
Outcome topology_ordering() {
    Outcome o;
    SimulateRequest req;
    req.topology = Topology::HORing;
    req.ranks = 128;
    req.group = 8;
    req.bytes = 1'000'000'000;
    const Report r = simulate_report(req);
    const auto& cmp = r.body["comparison"];
    const double ring = cmp[0]["simulated_time_s"].get<double>();
    const double h = cmp[1]["simulated_time_s"].get<double>();
    const double ho = cmp[2]["simulated_time_s"].get<double>();
    o.check(r.passed, "oracle failed");
    o.check(ho < h && h < ring, "ordering");
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "ring %.2f ms, h-ring %.2f ms, ho-ring %.2f ms; h vs ring %.1f%%, ho vs h %.1f%% "
                  "(hardware: 288/183/162 ms, 36.5%%/11.5%%)",
                  ring * 1e3, h * 1e3, ho * 1e3, r.body["improvement_percent"]["h-ring_vs_ring"].get<double>(),
                  r.body["improvement_percent"]["ho-ring_vs_h-ring"].get<double>());
    o.detail = o.ok ? buf : o.detail + "; " + buf;
    return o;
}

// 7. Every first-principle strategy trains like a single process.
Outcome convergence() {
    Outcome o;
    const TinyModel model = TinyModel::make(default_dims(), 42);
    TrainConfig cfg;
    cfg.cluster = validate_cluster(4, 2, 2);
    cfg.steps = 20;
    cfg.seed = 42;
    const Snapshot base = run_baseline(model, cfg);
    double worst = 0;
    int passed = 0;
    for (const Strategy& s : filter_principle1(enumerate_all())) {
        const StrategyRun run = run_strategy(scheme_for(s), model, cfg);
        const double diff = max_abs_diff(base, run.params);
        worst = std::max(worst, diff);
        const bool ok = run.failure.empty() && run.reduction_counts_ok && run.residency_ok && diff < 1e-9;
        o.check(ok, s.code() + " diff " + std::to_string(diff) + " " + run.failure);
        passed += ok ? 1 : 0;
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "%d/14 strategies, max diff %.3g", passed, worst);
    o.detail = o.ok ? buf : o.detail;
    return o;
}

// 8. Same inputs, same bytes.
Outcome determinism() {
    Outcome o;
    const NetworkSpec net;
    const ClusterSpec cl = validate_cluster(8, 4, 2);
    const ModelSpec model = make_model(3200, 3200, 2);
    SimulateRequest sim;
    sim.topology = Topology::HORing;
    sim.collective = Collective::ReduceScatter;
    sim.ranks = 16;
    sim.group = 4;
    sim.bytes = 16 * 64;
    sim.seed = 5;
    VerifyRequest ver;
    ver.strategies = {parse_strategy("IIG"), parse_strategy("GNG")};
    ver.cluster = validate_cluster(4, 2, 2);
    ver.steps = 5;
    const std::vector<std::pair<std::string, std::function<Report()>>> commands{
        {"plan", [&] { return plan_report(Regime::Full, make_model(7'000'000'000, 7'000'000'000), fig5_cluster(), net); }},
        {"cost", [&] { return cost_report(resolve_scheme("paro-igg"), cl, model, net, true); }},
        {"cost --fig5", [&] { return fig5_report(net, 42); }},
        {"cost --savings", [&] { return savings_report(cl, model); }},
        {"simulate", [&] { return simulate_report(sim); }},
        {"simulate --plan", [&] { return replay_report(generate(resolve_scheme("zero++"), cl, model), net, true, 3); }},
        {"verify", [&] { return verify_report(ver); }}};
    for (const auto& [name, run] : commands) {
        const Report a = run();
        const Report b = run();
        for (Format f : {Format::Json, Format::Csv, Format::Table}) {
            o.check(render(a, f) == render(b, f), name + " output differs");
        }
        o.check(a.trace_jsonl == b.trace_jsonl, name + " trace differs");
        o.check(Json::parse(render(a, Format::Json)).contains("config"), name + " lacks config");
    }
    if (o.ok) o.detail = std::to_string(commands.size()) + " commands x 3 formats byte-identical";
    return o;
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        Outcome (*run)();
    };
    const Criterion criteria[] = {
        {1, "strategy space and recommendation matrix", 1.0, strategy_space},
        {2, "grouped reduce-scatter savings", 5.0, savings},
        {3, "published volume rows", 30.0, volumes},
        {4, "memory rows and orderings", 0.0, memory_rows},
        {5, "collective correctness", 60.0, collectives},
        {6, "HO-Ring advantage", 0.0, topology_ordering},
        {7, "convergence equivalence", 60.0, convergence},
        {8, "determinism", 0.0, determinism},
    };
    int failed = 0;
    for (const Criterion& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.ok = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_s > 0 && secs >= c.budget_s) {
            o.ok = false;
            o.detail += " (over the " + std::to_string(static_cast<int>(c.budget_s)) + " s budget)";
        }
        std::printf("%s [%d] %s: %s (%.3f s)\n", o.ok ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
        failed += o.ok ? 0 : 1;
    }
    std::printf("%d/8 criteria passed\n", 8 - failed);
    return failed == 0 ? 0 : 1;
}
