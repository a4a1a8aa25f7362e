/* Copyright 2026 The PaRO Planner Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface of the planner library. Every call that can fail returns a
 * paro_status; the message of the last failure on the calling thread is
 * available from paro_last_error().
 */
#ifndef PARO_PARO_H
#define PARO_PARO_H

#include <stddef.h>
#include <stdint.h>

#if defined(PARO_BUILDING_LIBRARY)
#define PARO_API __attribute__((visibility("default")))
#else
#define PARO_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum paro_status {
    PARO_OK = 0,
    PARO_INVALID_ARGUMENT = 1, /* bad input: unknown name, invalid cluster, malformed plan */
    PARO_CHECK_FAILED = 2,     /* reserved for checks that abort before a report exists */
    PARO_INTERNAL = 3
} paro_status;

typedef struct paro_report paro_report;

typedef struct paro_model_desc {
    int64_t total_params;
    int64_t trainable_params; /* 0: same as total_params */
    int64_t param_bytes;
    int64_t grad_bytes;
    double optim_factor;
    int64_t layers;
    int peft;
} paro_model_desc;

typedef struct paro_cluster_desc {
    int64_t n_gpus;
    int64_t group_size;
    int64_t accum_steps;
} paro_cluster_desc;

typedef struct paro_network_desc {
    double intra_bw;
    double inter_bw;
    double intra_latency;
    double inter_latency;
} paro_network_desc;

PARO_API void paro_model_desc_init(paro_model_desc* d);
PARO_API void paro_cluster_desc_init(paro_cluster_desc* d);
PARO_API void paro_network_desc_init(paro_network_desc* d);

/* regime: full, partial-large, partial-small or peft. */
PARO_API paro_status paro_plan(const char* regime, const paro_model_desc* model, const paro_cluster_desc* cluster,
                               const paro_network_desc* net, paro_report** out);

/* scheme: a method name (ddp, zero-3, mics, paro-iig, ...) or, with by_strategy set, a three-letter code. */
PARO_API paro_status paro_cost(const char* scheme, int by_strategy, const paro_model_desc* model,
                               const paro_cluster_desc* cluster, const paro_network_desc* net, int include_plan,
                               paro_report** out);
PARO_API paro_status paro_savings(const paro_model_desc* model, const paro_cluster_desc* cluster, paro_report** out);
PARO_API paro_status paro_fig5(const paro_network_desc* net, uint64_t seed, paro_report** out);

/* group 0 puts all ranks in one group. */
PARO_API paro_status paro_simulate(const char* topology, const char* collective, int64_t ranks, int64_t group,
                                   int64_t bytes, uint64_t seed, const paro_network_desc* net, paro_report** out);
/* plan_json: a plan object, or a cost report that embeds one. */
PARO_API paro_status paro_replay(const char* plan_json, const paro_network_desc* net, int ho_fusion, uint64_t seed,
                                 paro_report** out);
/* n_strategies 0 selects every strategy that satisfies the first principle. */
PARO_API paro_status paro_verify(const char* const* strategies, size_t n_strategies, const paro_cluster_desc* cluster,
                                 int64_t steps, uint64_t seed, double tolerance, paro_report** out);

/* format: json, csv or table. The string is released with paro_string_free. */
PARO_API paro_status paro_report_render(const paro_report* report, const char* format, char** out);
PARO_API paro_status paro_report_trace_jsonl(const paro_report* report, char** out);
/* 1 when every check the command performed held. */
PARO_API int paro_report_passed(const paro_report* report);
PARO_API void paro_report_destroy(paro_report* report);
PARO_API void paro_string_free(char* s);

/* Accepts integers and scientific notation with an integral value, e.g. 7e9. */
PARO_API paro_status paro_parse_count(const char* text, int64_t* out);

PARO_API const char* paro_last_error(void);
PARO_API const char* paro_version(void);

#ifdef __cplusplus
}
#endif

#endif /* PARO_PARO_H */
