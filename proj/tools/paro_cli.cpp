// Copyright 2026 The PaRO Planner Authors
// SPDX-License-Identifier: Apache-2.0

// paro: sharding-strategy planner, cost model, collective simulator and verifier.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "paro/paro.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string format = "json";
    std::string out;
    std::uint64_t seed = 42;
    paro_network_desc net{};
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv", "table"}));
    app->add_option("--out", c.out, "Write output to this path instead of stdout");
    app->add_option("--seed", c.seed, "Seed for synthetic payloads and training data");
    app->add_option("--intra-bw", c.net.intra_bw, "Intra-group link bandwidth, bytes/s");
    app->add_option("--inter-bw", c.net.inter_bw, "Inter-group link bandwidth, bytes/s");
    app->add_option("--intra-latency", c.net.intra_latency, "Intra-group per-round latency, s");
    app->add_option("--inter-latency", c.net.inter_latency, "Inter-group per-round latency, s");
}

std::int64_t count(const std::string& text, const char* flag) {
    std::int64_t v = 0;
    if (paro_parse_count(text.c_str(), &v) != PARO_OK) {
        throw UsageError(std::string(flag) + ": " + paro_last_error());
    }
    return v;
}

std::optional<std::int64_t> count(const std::optional<std::string>& text, const char* flag) {
    if (!text) return std::nullopt;
    return count(*text, flag);
}

// Model and cluster flags shared by plan and cost.
struct Shape {
    std::optional<std::string> params, trainable, gpus, group, groups, accum, layers;
    bool peft = false;

    void add(CLI::App* app, bool with_peft) {
        app->add_option("--params", params, "Total parameters (Psi), e.g. 7e9");
        app->add_option("--trainable", trainable, "Trainable parameters (Psi'), default: --params");
        app->add_option("--gpus", gpus, "Number of GPUs (N)");
        auto* g = app->add_option("--group", group, "GPUs per group (M)");
        auto* gs = app->add_option("--groups", groups, "Number of groups (g = N / M)");
        g->excludes(gs);
        app->add_option("--accum", accum, "Gradient accumulation steps (s), default 1");
        app->add_option("--layers", layers, "Layers the parameters are split into, default 1");
        if (with_peft) app->add_flag("--peft", peft, "Parameter-efficient fine-tuning");
    }

    paro_model_desc model() const {
        paro_model_desc m;
        paro_model_desc_init(&m);
        if (!params) throw UsageError("--params is required");
        m.total_params = *count(params, "--params");
        m.trainable_params = trainable ? *count(trainable, "--trainable") : m.total_params;
        m.layers = layers ? *count(layers, "--layers") : 1;
        m.peft = peft ? 1 : 0;
        return m;
    }

    paro_cluster_desc cluster() const {
        paro_cluster_desc c;
        paro_cluster_desc_init(&c);
        if (!gpus) throw UsageError("--gpus is required");
        c.n_gpus = *count(gpus, "--gpus");
        if (groups) {
            const std::int64_t g = *count(groups, "--groups");
            if (g <= 0 || c.n_gpus % g != 0) throw UsageError("--groups must divide --gpus");
            c.group_size = c.n_gpus / g;
        } else {
            c.group_size = group ? *count(group, "--group") : c.n_gpus;
        }
        c.accum_steps = accum ? *count(accum, "--accum") : 1;
        return c;
    }
};

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << text;
}

std::string read_text(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// Takes ownership of a string returned by the library.
std::string take(char* s) {
    std::string out = s ? s : "";
    paro_string_free(s);
    return out;
}

// Renders and writes a report, returning the process exit code.
int finish(paro_status st, paro_report*& report, const Common& c, const std::string& trace_path = {}) {
    if (st != PARO_OK) {
        std::cerr << "error: " << paro_last_error() << "\n";
        return st == PARO_INVALID_ARGUMENT ? kExitUsage : kExitFailed;
    }
    char* text = nullptr;
    if (paro_report_render(report, c.format.c_str(), &text) != PARO_OK) {
        std::cerr << "error: " << paro_last_error() << "\n";
        paro_report_destroy(report);
        return kExitFailed;
    }
    write_text(c.out, take(text));
    if (!trace_path.empty()) {
        char* trace = nullptr;
        paro_report_trace_jsonl(report, &trace);
        write_text(trace_path, take(trace));
    }
    const bool passed = paro_report_passed(report) != 0;
    paro_report_destroy(report);
    if (!passed) std::cerr << "error: one or more checks failed (see report)\n";
    return passed ? kExitOk : kExitFailed;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sharding-strategy planner and collective simulator"};
    app.set_version_flag("--version", paro_version());
    app.require_subcommand(1);

    Common common;
    paro_network_desc_init(&common.net);

    // plan
    auto* plan = app.add_subcommand("plan", "Rank the 14 candidate strategies for a training regime");
    std::string regime;
    Shape plan_shape;
    plan->add_option("--regime", regime, "full, partial-large, partial-small or peft")->required();
    plan_shape.add(plan, false);
    add_common(plan, common);

    // cost
    auto* cost = app.add_subcommand("cost", "Memory, communication volume and time of one method or strategy");
    std::string method, strategy;
    bool fig5 = false, fig5_config = false, savings = false, with_plan = false;
    Shape cost_shape;
    auto* o_method = cost->add_option("--method", method, "Named method, e.g. zero-3, mics, paro-iig");
    auto* o_strategy = cost->add_option("--strategy", strategy, "Strategy code, e.g. IIG");
    auto* o_fig5 = cost->add_flag("--fig5", fig5, "Every named method at 7e9 params, 64 GPUs, 8 groups, s=8");
    cost->add_flag("--fig5-config", fig5_config, "Use the --fig5 model and cluster for one method");
    auto* o_savings = cost->add_flag("--savings", savings, "Per-GPU volume saved by the grouped reduce-scatter");
    cost->add_flag("--plan", with_plan, "Embed the generated collective plan");
    o_method->excludes(o_strategy)->excludes(o_fig5)->excludes(o_savings);
    o_strategy->excludes(o_fig5)->excludes(o_savings);
    o_fig5->excludes(o_savings);
    cost_shape.add(cost, true);
    add_common(cost, common);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Run a collective, or replay a plan, on the round-based simulator");
    std::string topo = "ring", collective = "all-gather", plan_file, trace_file;
    std::optional<std::string> ranks, sim_group, bytes;
    bool ho_fusion = false;
    sim->add_option("--topo", topo, "ring, h-ring or ho-ring");
    sim->add_option("--collective", collective, "all-gather or reduce-scatter");
    sim->add_option("--ranks", ranks, "Number of ranks");
    sim->add_option("--group", sim_group, "Ranks per group, default: all ranks");
    sim->add_option("--bytes", bytes, "Total buffer size in bytes, e.g. 1e9");
    auto* o_plan = sim->add_option("--plan", plan_file, "Replay a plan (JSON from `cost --plan`)");
    sim->add_flag("--ho-fusion", ho_fusion, "Run adjacent intra/inter collectives as HO-Ring when replaying");
    sim->add_option("--trace", trace_file, "Write the per-round trace as JSON lines");
    add_common(sim, common);

    // verify
    auto* verify = app.add_subcommand("verify", "Train a tiny model under each strategy and compare with one process");
    std::vector<std::string> strategies;
    bool all_p1 = false;
    std::string v_gpus = "4", v_group = "2", v_accum = "2", v_steps = "20";
    double tolerance = 1e-9;
    auto* o_vs = verify->add_option("--strategy", strategies, "Strategy code; repeatable");
    auto* o_all = verify->add_flag("--all-p1", all_p1, "Every strategy that keeps optimizer states sharded widest");
    o_vs->excludes(o_all);
    verify->add_option("--gpus", v_gpus, "Number of simulated ranks");
    verify->add_option("--group", v_group, "Ranks per group");
    verify->add_option("--accum", v_accum, "Micro-batches per step");
    verify->add_option("--steps", v_steps, "Optimizer steps");
    verify->add_option("--tolerance", tolerance, "Max absolute parameter difference allowed");
    add_common(verify, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        paro_report* report = nullptr;
        if (plan->parsed()) {
            const paro_model_desc m = plan_shape.model();
            const paro_cluster_desc c = plan_shape.cluster();
            return finish(paro_plan(regime.c_str(), &m, &c, &common.net, &report), report, common);
        }
        if (cost->parsed()) {
            if (fig5) return finish(paro_fig5(&common.net, common.seed, &report), report, common);
            Shape shape = cost_shape;
            if (fig5_config) {
                if (!shape.params) shape.params = "7e9";
                if (!shape.gpus) shape.gpus = "64";
                if (!shape.group && !shape.groups) shape.groups = "8";
                if (!shape.accum) shape.accum = "8";
            }
            const paro_model_desc m = shape.model();
            const paro_cluster_desc c = shape.cluster();
            if (savings) return finish(paro_savings(&m, &c, &report), report, common);
            if (method.empty() && strategy.empty()) throw UsageError("one of --method, --strategy, --fig5 or --savings is required");
            const bool by_strategy = !strategy.empty();
            const std::string& name = by_strategy ? strategy : method;
            return finish(paro_cost(name.c_str(), by_strategy ? 1 : 0, &m, &c, &common.net, with_plan ? 1 : 0, &report),
                          report, common);
        }
        if (sim->parsed()) {
            if (*o_plan) {
                const std::string text = read_text(plan_file);
                return finish(paro_replay(text.c_str(), &common.net, ho_fusion ? 1 : 0, common.seed, &report), report,
                              common, trace_file);
            }
            if (!ranks) throw UsageError("--ranks is required");
            if (!bytes) throw UsageError("--bytes is required");
            const std::int64_t n = *count(ranks, "--ranks");
            const std::int64_t g = sim_group ? *count(sim_group, "--group") : 0;
            return finish(paro_simulate(topo.c_str(), collective.c_str(), n, g, *count(bytes, "--bytes"), common.seed,
                                        &common.net, &report),
                          report, common, trace_file);
        }
        if (verify->parsed()) {
            if (strategies.empty() && !all_p1) throw UsageError("one of --strategy or --all-p1 is required");
            paro_cluster_desc c;
            c.n_gpus = count(v_gpus, "--gpus");
            c.group_size = count(v_group, "--group");
            c.accum_steps = count(v_accum, "--accum");
            std::vector<const char*> codes;
            for (const auto& s : strategies) codes.push_back(s.c_str());
            return finish(paro_verify(codes.data(), codes.size(), &c, count(v_steps, "--steps"), common.seed, tolerance,
                                      &report),
                          report, common);
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailed;
    }
    return kExitUsage;
}
