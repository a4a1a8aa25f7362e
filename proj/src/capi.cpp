// Copyright 2026 The PaRO Planner Authors
// SPDX-License-Identifier: Apache-2.0

#include "paro/paro.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "paro/report.hpp"
#include "paro/strategy.hpp"

struct paro_report {
    paro::Report report;
};

namespace {

thread_local std::string g_last_error;

paro_status fail(paro_status status, std::string message) {
    g_last_error = std::move(message);
    return status;
}

// Runs `body`, translating exceptions into status codes.
template <class F>
paro_status guarded(F&& body) {
    try {
        body();
        g_last_error.clear();
        return PARO_OK;
    } catch (const paro::ValidationError& e) {
        return fail(PARO_INVALID_ARGUMENT, e.what());
    } catch (const nlohmann::json::exception& e) {
        return fail(PARO_INVALID_ARGUMENT, e.what());
    } catch (const std::bad_alloc&) {
        return fail(PARO_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(PARO_INTERNAL, e.what());
    }
}

void require(const void* p, const char* what) {
    if (p == nullptr) throw paro::ValidationError(std::string(what) + " is null");
}

paro::ModelSpec to_model(const paro_model_desc* d) {
    require(d, "model");
    paro::ModelSpec m;
    m.total_params = d->total_params;
    m.trainable_params = d->trainable_params == 0 ? d->total_params : d->trainable_params;
    m.param_bytes = d->param_bytes;
    m.grad_bytes = d->grad_bytes;
    m.optim_factor = d->optim_factor;
    m.layers = d->layers;
    m.peft = d->peft != 0;
    paro::validate_model(m);
    return m;
}

paro::ClusterSpec to_cluster(const paro_cluster_desc* d) {
    require(d, "cluster");
    return paro::validate_cluster(d->n_gpus, d->group_size, d->accum_steps);
}

paro::NetworkSpec to_network(const paro_network_desc* d) {
    require(d, "network");
    paro::NetworkSpec n;
    n.intra_bw = d->intra_bw;
    n.inter_bw = d->inter_bw;
    n.intra_latency = d->intra_latency;
    n.inter_latency = d->inter_latency;
    paro::validate_network(n);
    return n;
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void emit(paro::Report report, paro_report** out) {
    *out = new paro_report{std::move(report)};
}

} // namespace

extern "C" {

void paro_model_desc_init(paro_model_desc* d) {
    if (d == nullptr) return;
    const paro::ModelSpec m;
    *d = paro_model_desc{m.total_params, m.trainable_params, m.param_bytes, m.grad_bytes, m.optim_factor, m.layers, 0};
}

void paro_cluster_desc_init(paro_cluster_desc* d) {
    if (d == nullptr) return;
    *d = paro_cluster_desc{1, 1, 1};
}

void paro_network_desc_init(paro_network_desc* d) {
    if (d == nullptr) return;
    const paro::NetworkSpec n;
    *d = paro_network_desc{n.intra_bw, n.inter_bw, n.intra_latency, n.inter_latency};
}

paro_status paro_plan(const char* regime, const paro_model_desc* model, const paro_cluster_desc* cluster,
                      const paro_network_desc* net, paro_report** out) {
    return guarded([&] {
        require(out, "out");
        require(regime, "regime");
        emit(paro::plan_report(paro::parse_regime(regime), to_model(model), to_cluster(cluster), to_network(net)), out);
    });
}

paro_status paro_cost(const char* scheme, int by_strategy, const paro_model_desc* model,
                      const paro_cluster_desc* cluster, const paro_network_desc* net, int include_plan,
                      paro_report** out) {
    return guarded([&] {
        require(out, "out");
        require(scheme, "scheme");
        const paro::Scheme s = by_strategy ? paro::scheme_for(paro::parse_strategy(scheme)) : paro::resolve_scheme(scheme);
        emit(paro::cost_report(s, to_cluster(cluster), to_model(model), to_network(net), include_plan != 0), out);
    });
}

paro_status paro_savings(const paro_model_desc* model, const paro_cluster_desc* cluster, paro_report** out) {
    return guarded([&] {
        require(out, "out");
        emit(paro::savings_report(to_cluster(cluster), to_model(model)), out);
    });
}

paro_status paro_fig5(const paro_network_desc* net, uint64_t seed, paro_report** out) {
    return guarded([&] {
        require(out, "out");
        emit(paro::fig5_report(to_network(net), seed), out);
    });
}

paro_status paro_simulate(const char* topology, const char* collective, int64_t ranks, int64_t group, int64_t bytes,
                          uint64_t seed, const paro_network_desc* net, paro_report** out) {
    return guarded([&] {
        require(out, "out");
        require(topology, "topology");
        require(collective, "collective");
        paro::SimulateRequest req;
        req.topology = paro::parse_topology(topology);
        req.collective = paro::parse_collective(collective);
        req.ranks = ranks;
        req.group = group;
        req.bytes = bytes;
        req.seed = seed;
        req.net = to_network(net);
        emit(paro::simulate_report(req), out);
    });
}

paro_status paro_replay(const char* plan_json, const paro_network_desc* net, int ho_fusion, uint64_t seed,
                        paro_report** out) {
    return guarded([&] {
        require(out, "out");
        require(plan_json, "plan_json");
        const paro::SchedulePlan plan = paro::plan_from_json(paro::Json::parse(plan_json));
        emit(paro::replay_report(plan, to_network(net), ho_fusion != 0, seed), out);
    });
}

paro_status paro_verify(const char* const* strategies, size_t n_strategies, const paro_cluster_desc* cluster,
                        int64_t steps, uint64_t seed, double tolerance, paro_report** out) {
    return guarded([&] {
        require(out, "out");
        paro::VerifyRequest req;
        if (n_strategies == 0) {
            const auto all = paro::enumerate_all();
            req.strategies = paro::filter_principle1(all);
        } else {
            require(strategies, "strategies");
            for (size_t i = 0; i < n_strategies; ++i) {
                require(strategies[i], "strategy");
                req.strategies.push_back(paro::parse_strategy(strategies[i]));
            }
        }
        req.cluster = to_cluster(cluster);
        req.steps = steps;
        req.seed = seed;
        req.tolerance = tolerance;
        emit(paro::verify_report(req), out);
    });
}

paro_status paro_report_render(const paro_report* report, const char* format, char** out) {
    return guarded([&] {
        require(report, "report");
        require(format, "format");
        require(out, "out");
        *out = dup_string(paro::render(report->report, paro::parse_format(format)));
    });
}

paro_status paro_report_trace_jsonl(const paro_report* report, char** out) {
    return guarded([&] {
        require(report, "report");
        require(out, "out");
        *out = dup_string(report->report.trace_jsonl);
    });
}

int paro_report_passed(const paro_report* report) { return report != nullptr && report->report.passed ? 1 : 0; }

void paro_report_destroy(paro_report* report) { delete report; }

void paro_string_free(char* s) { std::free(s); }

paro_status paro_parse_count(const char* text, int64_t* out) {
    return guarded([&] {
        require(text, "text");
        require(out, "out");
        *out = paro::parse_count(text);
    });
}

const char* paro_last_error(void) { return g_last_error.c_str(); }

const char* paro_version(void) { return "0.1.0"; }

} // extern "C"
