/*
 * mvusim — cycle-accurate simulator for FINN-style matrix-vector compute
 * units: quantized GEMM-lowered layers, PE/SIMD folding, AXI-Stream flow
 * control with backpressure, and multi-layer streaming pipelines.
 *
 * C API over the shared library. All objects are opaque handles created and
 * destroyed here; every fallible call returns an mvusim_status. On error, a
 * thread-local message is available via mvusim_last_error().
 */

#ifndef MVUSIM_H
#define MVUSIM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MVUSIM_API __declspec(dllexport)
#else
#define MVUSIM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mvusim_status {
    MVUSIM_OK = 0,
    MVUSIM_E_VALIDATION = 1, /* bad shapes, folds, precisions, config files */
    MVUSIM_E_IO = 2,         /* missing or unwritable files */
    MVUSIM_E_INTERNAL = 3    /* a simulator invariant was violated */
} mvusim_status;

typedef enum mvusim_datapath {
    MVUSIM_DATAPATH_XNOR = 0,
    MVUSIM_DATAPATH_BINARY_WEIGHT = 1,
    MVUSIM_DATAPATH_STANDARD = 2
} mvusim_datapath;

typedef struct mvusim_config mvusim_config;     /* validated layer config */
typedef struct mvusim_unit mvusim_unit;         /* steppable MVU batch unit */
typedef struct mvusim_pipeline mvusim_pipeline; /* composed layer chain */

/* Last error message for the calling thread; empty string when none. */
MVUSIM_API const char* mvusim_last_error(void);

MVUSIM_API void mvusim_version(int* major, int* minor, int* patch);

/* ------------------------------------------------------------------ */
/* Layer configuration                                                 */

typedef struct mvusim_layer_params {
    int32_t kernel_dim;
    int32_t ifm_channels;
    int32_t ifm_dim;
    int32_t ofm_channels;
    int32_t ofm_dim; /* pass 0 to derive ifm_dim - kernel_dim + 1 */
    int32_t pe;
    int32_t simd;
    mvusim_datapath datapath;
    int32_t input_bits;  /* ignored for xnor */
    int32_t weight_bits; /* ignored for xnor and binary-weight */
} mvusim_layer_params;

MVUSIM_API mvusim_status mvusim_config_create(const mvusim_layer_params* params,
                                              mvusim_config** out_config);
MVUSIM_API void mvusim_config_destroy(mvusim_config* config);

typedef struct mvusim_derived_params {
    int64_t synapse_fold;       /* K_d^2 * I_c / S */
    int64_t neuron_fold;        /* O_c / P */
    int64_t weight_mem_depth;   /* SF * NF */
    int64_t input_buffer_depth; /* SF */
    int64_t weight_word_bits;   /* S * B_w */
    int64_t total_weight_bits;
    int64_t input_buffer_bits;
    int32_t accumulator_bits;
    int64_t input_word_bits;
    int64_t output_word_bits;
    int64_t matrix_rows; /* K_d^2 * I_c */
    int64_t matrix_cols; /* O_d^2 */
} mvusim_derived_params;

MVUSIM_API mvusim_status mvusim_config_derived(const mvusim_config* config,
                                               mvusim_derived_params* out);

/* ------------------------------------------------------------------ */
/* Single unit                                                         */

typedef struct mvusim_unit_options {
    int32_t fifo_depth;     /* output FIFO words; <= 0 for the default (4) */
    int32_t pipeline_depth; /* result register stages; <= 0 for default (5) */
} mvusim_unit_options;

/* weights: row-major O_c x K_d^2*I_c. Binary kinds expect elements in {0,1}
 * encoding {-1,+1}; the standard kind expects signed values within
 * weight_bits. */
MVUSIM_API mvusim_status mvusim_unit_create(const mvusim_config* config, const int64_t* weights,
                                            size_t weight_count,
                                            const mvusim_unit_options* options,
                                            mvusim_unit** out_unit);
MVUSIM_API void mvusim_unit_destroy(mvusim_unit* unit);
MVUSIM_API mvusim_status mvusim_unit_reset(mvusim_unit* unit);

/* One clock edge. in_lanes (simd activations) is consumed only when the beat
 * transfers; out_lanes (pe accumulator values) is filled when a word
 * transfers. Any of the out pointers may be NULL. */
MVUSIM_API mvusim_status mvusim_unit_step(mvusim_unit* unit, int32_t in_valid,
                                          const int64_t* in_lanes, int32_t out_ready,
                                          int32_t* out_in_accepted, int32_t* out_word_produced,
                                          int64_t* out_lanes);

typedef struct mvusim_trace_counters {
    uint64_t total_cycles;
    uint64_t beats_in;
    uint64_t beats_out;
    uint64_t stall_cycles_backpressure;
    uint64_t stall_cycles_starvation;
    uint64_t compute_cycles;
    uint64_t idle_state_cycles;
    uint64_t write_state_cycles;
    uint64_t read_state_cycles;
} mvusim_trace_counters;

MVUSIM_API mvusim_status mvusim_unit_trace(const mvusim_unit* unit, mvusim_trace_counters* out);

typedef struct mvusim_flow_pattern {
    /* 0: always, 1: never, 2: random Bernoulli(density) per cycle */
    int32_t kind;
    double density;
    uint64_t seed;
} mvusim_flow_pattern;

typedef struct mvusim_run_stats {
    int32_t completed;
    uint64_t first_input_cycle;
    uint64_t last_output_cycle;
    uint64_t latency_cycles;
    mvusim_trace_counters trace;
} mvusim_run_stats;

/* Streams `vectors` columns (column-major, matrix_rows each) through a fresh
 * run of the unit and writes vectors * O_c outputs row-major. Pattern
 * pointers may be NULL for unconstrained flow. */
MVUSIM_API mvusim_status mvusim_run_layer(const mvusim_config* config, const int64_t* weights,
                                          size_t weight_count, const int64_t* image,
                                          int64_t vectors, const mvusim_unit_options* options,
                                          const mvusim_flow_pattern* in_pattern,
                                          const mvusim_flow_pattern* out_pattern,
                                          int64_t* out_values, size_t out_capacity,
                                          mvusim_run_stats* out_stats);

/* ------------------------------------------------------------------ */
/* Pipelines                                                           */

MVUSIM_API mvusim_status mvusim_pipeline_create(const mvusim_config* const* configs,
                                                const int64_t* const* weights,
                                                const size_t* weight_counts, size_t layer_count,
                                                const mvusim_unit_options* options,
                                                mvusim_pipeline** out_pipeline);
MVUSIM_API void mvusim_pipeline_destroy(mvusim_pipeline* pipeline);

/* inputs: vectors * first-layer matrix_rows values, vector-major. outputs:
 * vectors * last-layer O_c values, row-major. */
MVUSIM_API mvusim_status mvusim_pipeline_run(mvusim_pipeline* pipeline, const int64_t* inputs,
                                             int64_t vectors, int64_t* out_values,
                                             size_t out_capacity, uint64_t* out_end_to_end_cycles);

/* ------------------------------------------------------------------ */
/* File-level operations backing the CLI                               */

/* Parses a config file; reports what it contains: 1 layer, 2 sweep,
 * 3 pipeline. */
MVUSIM_API mvusim_status mvusim_config_file_kind(const char* path, int32_t* out_kind);

/* Validates the config file and writes a human-readable summary of the
 * derived parameters into `buffer` (NUL-terminated, truncated to capacity). */
MVUSIM_API mvusim_status mvusim_validate_file(const char* path, char* buffer, size_t capacity);

typedef struct mvusim_run_file_options {
    mvusim_unit_options unit;
    uint64_t seed;
    int64_t vectors; /* <= 0: full O_d^2 image per point */
} mvusim_run_file_options;

/* Runs a single-layer config file with seeded stimulus and writes CSV and/or
 * JSON reports (either path may be NULL). */
MVUSIM_API mvusim_status mvusim_run_file(const char* config_path,
                                         const mvusim_run_file_options* options,
                                         const char* csv_path, const char* json_path);

/* Runs a sweep config file; one report row per (value, datapath) point. */
MVUSIM_API mvusim_status mvusim_sweep_file(const char* config_path,
                                           const mvusim_run_file_options* options,
                                           const char* csv_path, const char* json_path);

typedef struct mvusim_nid_options {
    mvusim_unit_options unit;
    uint64_t seed;
    int64_t inferences;
    /* NULL for seeded random weights, else exactly four matrix files. */
    const char* const* weight_files;
    size_t weight_file_count;
} mvusim_nid_options;

typedef struct mvusim_nid_results {
    uint64_t layer_exec_cycles[4];
    uint64_t pipeline_end_to_end_cycles;
    uint64_t steady_state_ii;
} mvusim_nid_results;

/* Builds and runs the four-layer intrusion-detection MLP; writes optional
 * CSV/JSON reports and fills the headline numbers. */
MVUSIM_API mvusim_status mvusim_run_nid(const mvusim_nid_options* options, const char* csv_path,
                                        const char* json_path, mvusim_nid_results* out_results);

/* Streams `vectors` seeded random vectors through a single-layer config file
 * and writes the per-cycle trace (one line per cycle) to trace_path. */
MVUSIM_API mvusim_status mvusim_dump_trace(const char* config_path, int64_t vectors,
                                           const mvusim_run_file_options* options,
                                           const mvusim_flow_pattern* in_pattern,
                                           const mvusim_flow_pattern* out_pattern,
                                           const char* trace_path);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* MVUSIM_H */
