#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "core/configfile.hpp"
#include "core/pipeline.hpp"
#include "core/stream.hpp"

namespace mvusim {

// One sweep-point record: all config inputs, every derived quantity, and the
// measured cycle counters. Derived columns are re-checked against the config
// formulas each time a row is built.
struct ReportRow {
    int kernel_dim = 0;
    int ifm_channels = 0;
    int ifm_dim = 0;
    int ofm_channels = 0;
    int ofm_dim = 0;
    int pe = 0;
    int simd = 0;
    std::string datapath;
    int input_bits = 0;
    int weight_bits = 0;

    int64_t synapse_fold = 0;
    int64_t neuron_fold = 0;
    int64_t weight_mem_depth = 0;
    int64_t input_buffer_depth = 0;
    int64_t weight_word_bits = 0;
    int64_t total_weight_bits = 0;
    int64_t input_buffer_bits = 0;

    int64_t vectors_streamed = 0;
    uint64_t cycles_per_vector = 0;  // measured steady-state
    uint64_t latency_cycles = 0;     // first input beat to last output word
    uint64_t total_cycles = 0;
    uint64_t stall_backpressure = 0;
    uint64_t stall_starvation = 0;
    uint64_t beats_in = 0;
    uint64_t beats_out = 0;
};

ReportRow make_report_row(const LayerConfig& cfg, const RunResult& run);

// RFC 4180-style CSV: header row, quote-doubling, fields quoted when needed.
std::string rows_to_csv(const std::vector<ReportRow>& rows);
// Structured JSON document carrying the seed and run options for
// reproducibility.
std::string rows_to_json(const std::vector<ReportRow>& rows, uint64_t seed,
                         const MvuOptions& opts);

struct SweepRunOptions {
    MvuOptions unit;
    uint64_t seed = 1;
    // Vectors streamed per point; 0 streams the full O_d^2 image.
    int64_t vectors = 0;
};

// Runs every (value, kind) point of the sweep with seeded random stimulus,
// ordered by kind then value. Deterministic for a fixed spec and seed.
std::vector<ReportRow> run_sweep(const SweepSpec& spec, const SweepRunOptions& options);

// Runs one validated layer with seeded random stimulus.
ReportRow run_single(const LayerConfig& cfg, const WeightMatrix& weights,
                     const SweepRunOptions& options);

void write_text_file(const std::string& path, const std::string& contents);

// The four-layer intrusion-detection MLP the paper closes with.
struct NidOptions {
    MvuOptions unit;
    uint64_t seed = 1;
    int64_t inferences = 100;
    std::vector<std::string> weight_files;  // empty: seeded random weights
};

struct NidLayerResult {
    int64_t synapse_fold = 0;
    int64_t neuron_fold = 0;
    int64_t fold_product = 0;
    uint64_t latency_cycles = 0;  // standalone single-inference latency
};

struct NidReport {
    std::vector<NidLayerResult> layers;
    uint64_t pipeline_end_to_end_cycles = 0;  // single inference through the chain
    uint64_t steady_state_ii = 0;             // cycles per inference at the source
    int64_t inferences = 0;
    uint64_t seed = 0;
    MvuOptions options;
};

// Table of the four layer configurations (600-64-64-64-1 MLP, 2-bit data).
std::vector<LayerConfig> nid_layer_configs();

NidReport run_nid(const NidOptions& options);
std::string nid_report_to_json(const NidReport& report);
std::string nid_report_to_csv(const NidReport& report);
std::string nid_report_to_text(const NidReport& report);

struct TraceOptions {
    MvuOptions unit;
    FlowPattern in_pattern = FlowPattern::always();
    FlowPattern out_pattern = FlowPattern::always();
    uint64_t max_cycles = 0;
};

// Streams `vectors` random columns (seeded) through the layer and writes one
// line per cycle: cycle index, FSM state, both channel handshakes and the
// schedule position. A run with zero vectors emits just the header.
void dump_trace(const LayerConfig& cfg, const WeightMatrix& weights, int64_t vectors,
                uint64_t seed, const TraceOptions& options, std::ostream& out);

}  // namespace mvusim
