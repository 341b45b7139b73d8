#include "mvusim/mvusim.h"

#include <cstring>
#include <sstream>
#include <string>

#include "core/configfile.hpp"
#include "core/errors.hpp"
#include "core/pipeline.hpp"
#include "core/report.hpp"
#include "core/stream.hpp"
#include "core/weightio.hpp"

namespace {

thread_local std::string g_last_error;

mvusim_status to_status(const mvusim::Error& e) {
    g_last_error = e.what();
    switch (mvusim::error_category(e.code())) {
        case 1: return MVUSIM_E_VALIDATION;
        case 2: return MVUSIM_E_IO;
        default: return MVUSIM_E_INTERNAL;
    }
}

template <typename Fn>
mvusim_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return MVUSIM_OK;
    } catch (const mvusim::Error& e) {
        return to_status(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return MVUSIM_E_INTERNAL;
    }
}

mvusim::DatapathKind make_kind(const mvusim_layer_params& p) {
    switch (p.datapath) {
        case MVUSIM_DATAPATH_XNOR: return mvusim::DatapathKind::xnor();
        case MVUSIM_DATAPATH_BINARY_WEIGHT:
            return mvusim::DatapathKind::binary_weight(p.input_bits);
        case MVUSIM_DATAPATH_STANDARD:
        default:
            return mvusim::DatapathKind::standard(p.input_bits, p.weight_bits);
    }
}

mvusim::MvuOptions make_options(const mvusim_unit_options* options) {
    mvusim::MvuOptions out;
    if (options) {
        if (options->fifo_depth > 0) out.fifo_depth = options->fifo_depth;
        if (options->pipeline_depth > 0) out.pipeline_depth = options->pipeline_depth;
    }
    return out;
}

mvusim::FlowPattern make_pattern(const mvusim_flow_pattern* pattern) {
    if (!pattern) return mvusim::FlowPattern::always();
    switch (pattern->kind) {
        case 1: return mvusim::FlowPattern::never();
        case 2: return mvusim::FlowPattern::random(pattern->density, pattern->seed);
        case 0:
        default: return mvusim::FlowPattern::always();
    }
}

mvusim::WeightMatrix make_weights(const mvusim::LayerConfig& cfg, const int64_t* weights,
                                  size_t weight_count) {
    const int64_t rows = cfg.shape().ofm_channels;
    const int64_t cols = cfg.shape().matrix_rows();
    if (!weights || weight_count != static_cast<size_t>(rows) * static_cast<size_t>(cols)) {
        throw mvusim::ValidationError(mvusim::ErrorCode::ShapeMismatch,
                                      "weight buffer size does not match O_c x K_d^2*I_c");
    }
    mvusim::WeightMatrix m(rows, cols);
    std::memcpy(m.data.data(), weights, weight_count * sizeof(int64_t));
    return m;
}

void fill_trace(const mvusim::CycleTrace& t, mvusim_trace_counters* out) {
    out->total_cycles = t.total_cycles;
    out->beats_in = t.beats_in;
    out->beats_out = t.beats_out;
    out->stall_cycles_backpressure = t.stall_cycles_backpressure;
    out->stall_cycles_starvation = t.stall_cycles_starvation;
    out->compute_cycles = t.compute_cycles;
    out->idle_state_cycles = t.state_occupancy(mvusim::FsmState::Idle);
    out->write_state_cycles = t.state_occupancy(mvusim::FsmState::Write);
    out->read_state_cycles = t.state_occupancy(mvusim::FsmState::Read);
}

mvusim::SweepRunOptions make_run_file_options(const mvusim_run_file_options* options) {
    mvusim::SweepRunOptions out;
    if (options) {
        out.unit = make_options(&options->unit);
        out.seed = options->seed;
        if (options->vectors > 0) out.vectors = options->vectors;
    }
    return out;
}

}  // namespace

struct mvusim_config {
    mvusim::LayerConfig cfg;
};

struct mvusim_unit {
    mvusim::MvuUnit unit;
    mvusim::StreamChannel in;
    mvusim::StreamChannel out;
};

struct mvusim_pipeline {
    mvusim::Pipeline pipeline;
};

extern "C" {

const char* mvusim_last_error(void) { return g_last_error.c_str(); }

void mvusim_version(int* major, int* minor, int* patch) {
    if (major) *major = 1;
    if (minor) *minor = 0;
    if (patch) *patch = 0;
}

mvusim_status mvusim_config_create(const mvusim_layer_params* params, mvusim_config** out_config) {
    return guarded([&] {
        if (!params || !out_config) {
            throw mvusim::ValidationError(mvusim::ErrorCode::ZeroDimension, "null argument");
        }
        mvusim::LayerShape shape;
        shape.kernel_dim = params->kernel_dim;
        shape.ifm_channels = params->ifm_channels;
        shape.ifm_dim = params->ifm_dim;
        shape.ofm_channels = params->ofm_channels;
        shape.ofm_dim = params->ofm_dim > 0 ? params->ofm_dim
                                            : params->ifm_dim - params->kernel_dim + 1;
        const mvusim::FoldConfig fold{params->pe, params->simd};
        *out_config = new mvusim_config{
            mvusim::LayerConfig::validate(shape, fold, make_kind(*params))};
    });
}

void mvusim_config_destroy(mvusim_config* config) { delete config; }

mvusim_status mvusim_config_derived(const mvusim_config* config, mvusim_derived_params* out) {
    return guarded([&] {
        if (!config || !out) {
            throw mvusim::ValidationError(mvusim::ErrorCode::ZeroDimension, "null argument");
        }
        const mvusim::LayerConfig& cfg = config->cfg;
        out->synapse_fold = cfg.synapse_fold();
        out->neuron_fold = cfg.neuron_fold();
        out->weight_mem_depth = cfg.weight_mem_depth();
        out->input_buffer_depth = cfg.input_buffer_depth();
        out->weight_word_bits = cfg.weight_word_bits();
        out->total_weight_bits = cfg.total_weight_bits();
        out->input_buffer_bits = cfg.input_buffer_bits();
        out->accumulator_bits = cfg.accumulator_bits();
        out->input_word_bits = cfg.input_word_bits();
        out->output_word_bits = cfg.output_word_bits();
        out->matrix_rows = cfg.shape().matrix_rows();
        out->matrix_cols = cfg.shape().matrix_cols();
    });
}

mvusim_status mvusim_unit_create(const mvusim_config* config, const int64_t* weights,
                                 size_t weight_count, const mvusim_unit_options* options,
                                 mvusim_unit** out_unit) {
    return guarded([&] {
        if (!config || !out_unit) {
            throw mvusim::ValidationError(mvusim::ErrorCode::ZeroDimension, "null argument");
        }
        const mvusim::LayerConfig& cfg = config->cfg;
        *out_unit = new mvusim_unit{
            mvusim::MvuUnit(cfg, make_weights(cfg, weights, weight_count), make_options(options)),
            mvusim::StreamChannel(static_cast<int>(cfg.input_word_bits())),
            mvusim::StreamChannel(static_cast<int>(cfg.output_word_bits()))};
    });
}

void mvusim_unit_destroy(mvusim_unit* unit) { delete unit; }

mvusim_status mvusim_unit_reset(mvusim_unit* unit) {
    return guarded([&] {
        if (!unit) throw mvusim::ValidationError(mvusim::ErrorCode::ZeroDimension, "null unit");
        unit->unit.reset();
    });
}

mvusim_status mvusim_unit_step(mvusim_unit* unit, int32_t in_valid, const int64_t* in_lanes,
                               int32_t out_ready, int32_t* out_in_accepted,
                               int32_t* out_word_produced, int64_t* out_lanes) {
    return guarded([&] {
        if (!unit) throw mvusim::ValidationError(mvusim::ErrorCode::ZeroDimension, "null unit");
        const mvusim::LayerConfig& cfg = unit->unit.config();
        unit->in.begin_cycle();
        unit->out.begin_cycle();
        unit->in.tvalid = in_valid != 0;
        if (in_valid) {
            if (!in_lanes) {
                throw mvusim::ValidationError(mvusim::ErrorCode::ZeroDimension,
                                              "in_valid set but in_lanes is null");
            }
            const int bits = cfg.datapath().activation_bits();
            mvusim::BitWord word(static_cast<int>(cfg.input_word_bits()));
            for (int lane = 0; lane < cfg.fold().simd; ++lane) {
                word.set_lane(lane, bits, in_lanes[lane]);
            }
            unit->in.tdata = word;
        }
        unit->out.tready = out_ready != 0;
        unit->unit.drive(unit->in, unit->out);
        const bool accepted = unit->in.fired();
        const bool produced = unit->out.fired();
        unit->unit.commit(unit->in, unit->out);
        if (out_in_accepted) *out_in_accepted = accepted ? 1 : 0;
        if (out_word_produced) *out_word_produced = produced ? 1 : 0;
        if (produced && out_lanes) {
            const int acc_bits = cfg.accumulator_bits();
            for (int p = 0; p < cfg.fold().pe; ++p) {
                out_lanes[p] = unit->out.tdata.lane_signed(p, acc_bits);
            }
        }
    });
}

mvusim_status mvusim_unit_trace(const mvusim_unit* unit, mvusim_trace_counters* out) {
    return guarded([&] {
        if (!unit || !out) {
            throw mvusim::ValidationError(mvusim::ErrorCode::ZeroDimension, "null argument");
        }
        fill_trace(unit->unit.trace(), out);
    });
}

mvusim_status mvusim_run_layer(const mvusim_config* config, const int64_t* weights,
                               size_t weight_count, const int64_t* image, int64_t vectors,
                               const mvusim_unit_options* options,
                               const mvusim_flow_pattern* in_pattern,
                               const mvusim_flow_pattern* out_pattern, int64_t* out_values,
                               size_t out_capacity, mvusim_run_stats* out_stats) {
    return guarded([&] {
        if (!config || !image || vectors < 1) {
            throw mvusim::ValidationError(mvusim::ErrorCode::ZeroDimension, "bad arguments");
        }
        const mvusim::LayerConfig& cfg = config->cfg;
        const int64_t rows = cfg.shape().matrix_rows();
        mvusim::ImageMatrix img(rows, vectors);
        std::memcpy(img.data.data(), image,
                    static_cast<size_t>(rows) * static_cast<size_t>(vectors) * sizeof(int64_t));

        mvusim::RunOptions run_opts;
        run_opts.unit = make_options(options);
        run_opts.in_pattern = make_pattern(in_pattern);
        run_opts.out_pattern = make_pattern(out_pattern);
        if (run_opts.in_pattern.kind == mvusim::FlowPattern::Kind::Random ||
            run_opts.out_pattern.kind == mvusim::FlowPattern::Kind::Random) {
            run_opts.max_cycles = 1u << 22;
        }
        const mvusim::RunResult run =
            mvusim::run_layer(cfg, make_weights(cfg, weights, weight_count), img, run_opts);

        const size_t needed = static_cast<size_t>(vectors) *
                              static_cast<size_t>(cfg.shape().ofm_channels);
        if (out_values) {
            if (out_capacity < needed) {
                throw mvusim::ValidationError(mvusim::ErrorCode::ShapeMismatch,
                                              "output buffer too small");
            }
            std::memcpy(out_values, run.outputs.data.data(), needed * sizeof(int64_t));
        }
        if (out_stats) {
            out_stats->completed = run.completed ? 1 : 0;
            out_stats->first_input_cycle = run.first_input_cycle;
            out_stats->last_output_cycle = run.last_output_cycle;
            out_stats->latency_cycles = run.latency_cycles;
            fill_trace(run.trace, &out_stats->trace);
        }
    });
}

mvusim_status mvusim_pipeline_create(const mvusim_config* const* configs,
                                     const int64_t* const* weights, const size_t* weight_counts,
                                     size_t layer_count, const mvusim_unit_options* options,
                                     mvusim_pipeline** out_pipeline) {
    return guarded([&] {
        if (!configs || !weights || !weight_counts || layer_count == 0 || !out_pipeline) {
            throw mvusim::ValidationError(mvusim::ErrorCode::ZeroDimension, "bad arguments");
        }
        std::vector<mvusim::LayerConfig> cfgs;
        std::vector<mvusim::WeightMatrix> mats;
        for (size_t i = 0; i < layer_count; ++i) {
            if (!configs[i]) {
                throw mvusim::ValidationError(mvusim::ErrorCode::ZeroDimension, "null config");
            }
            cfgs.push_back(configs[i]->cfg);
            mats.push_back(make_weights(configs[i]->cfg, weights[i], weight_counts[i]));
        }
        *out_pipeline =
            new mvusim_pipeline{mvusim::Pipeline::compose(cfgs, mats, make_options(options))};
    });
}

void mvusim_pipeline_destroy(mvusim_pipeline* pipeline) { delete pipeline; }

mvusim_status mvusim_pipeline_run(mvusim_pipeline* pipeline, const int64_t* inputs,
                                  int64_t vectors, int64_t* out_values, size_t out_capacity,
                                  uint64_t* out_end_to_end_cycles) {
    return guarded([&] {
        if (!pipeline || !inputs || vectors < 1) {
            throw mvusim::ValidationError(mvusim::ErrorCode::ZeroDimension, "bad arguments");
        }
        const int64_t rows = pipeline->pipeline.layer_config(0).shape().matrix_rows();
        std::vector<std::vector<int64_t>> vecs(static_cast<size_t>(vectors));
        for (int64_t j = 0; j < vectors; ++j) {
            vecs[static_cast<size_t>(j)].assign(inputs + j * rows, inputs + (j + 1) * rows);
        }
        pipeline->pipeline.reset();
        const mvusim::PipelineRunResult run = pipeline->pipeline.run(vecs);
        if (!run.completed) {
            throw mvusim::InternalError(mvusim::ErrorCode::InternalInvariant,
                                        "pipeline run did not complete");
        }
        const size_t needed = run.outputs.data.size();
        if (out_values) {
            if (out_capacity < needed) {
                throw mvusim::ValidationError(mvusim::ErrorCode::ShapeMismatch,
                                              "output buffer too small");
            }
            std::memcpy(out_values, run.outputs.data.data(), needed * sizeof(int64_t));
        }
        if (out_end_to_end_cycles) *out_end_to_end_cycles = run.end_to_end_cycles;
    });
}

mvusim_status mvusim_config_file_kind(const char* path, int32_t* out_kind) {
    return guarded([&] {
        if (!path || !out_kind) {
            throw mvusim::ValidationError(mvusim::ErrorCode::ZeroDimension, "null argument");
        }
        const mvusim::ParsedConfig parsed = mvusim::parse_config_file(path);
        if (std::holds_alternative<mvusim::LayerSpec>(parsed)) *out_kind = 1;
        else if (std::holds_alternative<mvusim::SweepSpec>(parsed)) *out_kind = 2;
        else *out_kind = 3;
    });
}

mvusim_status mvusim_validate_file(const char* path, char* buffer, size_t capacity) {
    return guarded([&] {
        if (!path) throw mvusim::ValidationError(mvusim::ErrorCode::ZeroDimension, "null path");
        const mvusim::ParsedConfig parsed = mvusim::parse_config_file(path);
        std::ostringstream out;
        auto describe_layer = [&out](const mvusim::LayerConfig& cfg) {
            out << cfg.describe() << "\n"
                << "  SF=" << cfg.synapse_fold() << " NF=" << cfg.neuron_fold()
                << " D_mem=" << cfg.weight_mem_depth()
                << " buffer_depth=" << cfg.input_buffer_depth()
                << " weight_word_bits=" << cfg.weight_word_bits()
                << " acc_bits=" << cfg.accumulator_bits() << "\n";
        };
        if (const auto* layer = std::get_if<mvusim::LayerSpec>(&parsed)) {
            out << "layer config:\n";
            describe_layer(layer->validate());
        } else if (const auto* sweep = std::get_if<mvusim::SweepSpec>(&parsed)) {
            out << "sweep over " << mvusim::swept_parameter_name(sweep->parameter) << ", "
                << sweep->values.size() << " values x " << sweep->kinds.size() << " datapaths\n";
            for (const auto& kind : sweep->kinds) {
                for (const int64_t v : sweep->values) {
                    describe_layer(sweep->config_for(v, kind));
                }
            }
        } else if (const auto* pipe = std::get_if<mvusim::PipelineSpec>(&parsed)) {
            out << "pipeline of " << pipe->layers.size() << " layers:\n";
            std::vector<mvusim::LayerConfig> cfgs;
            for (const auto& l : pipe->layers) cfgs.push_back(l.validate());
            for (const auto& cfg : cfgs) describe_layer(cfg);
            // Adjacency check without building units.
            std::vector<mvusim::WeightMatrix> mats;
            for (const auto& cfg : cfgs) {
                mats.emplace_back(cfg.shape().ofm_channels, cfg.shape().matrix_rows());
            }
            mvusim::Pipeline::compose(cfgs, mats);
        }
        if (buffer && capacity > 0) {
            const std::string text = out.str();
            const size_t n = std::min(capacity - 1, text.size());
            std::memcpy(buffer, text.data(), n);
            buffer[n] = '\0';
        }
    });
}

mvusim_status mvusim_run_file(const char* config_path, const mvusim_run_file_options* options,
                              const char* csv_path, const char* json_path) {
    return guarded([&] {
        if (!config_path) {
            throw mvusim::ValidationError(mvusim::ErrorCode::ZeroDimension, "null path");
        }
        const mvusim::ParsedConfig parsed = mvusim::parse_config_file(config_path);
        const auto* layer = std::get_if<mvusim::LayerSpec>(&parsed);
        if (!layer) {
            throw mvusim::ValidationError(mvusim::ErrorCode::ShapeMismatch,
                                          "run expects a single-layer config file");
        }
        const mvusim::LayerConfig cfg = layer->validate();
        const mvusim::SweepRunOptions run_opts = make_run_file_options(options);
        std::mt19937_64 rng(run_opts.seed);
        mvusim::WeightMatrix weights =
            layer->weights_path ? mvusim::load_weights_for(cfg, *layer->weights_path)
                                : mvusim::random_weight_matrix(cfg, rng);
        const std::vector<mvusim::ReportRow> rows = {
            mvusim::run_single(cfg, weights, run_opts)};
        if (csv_path) mvusim::write_text_file(csv_path, mvusim::rows_to_csv(rows));
        if (json_path) {
            mvusim::write_text_file(json_path,
                                    mvusim::rows_to_json(rows, run_opts.seed, run_opts.unit));
        }
    });
}

mvusim_status mvusim_sweep_file(const char* config_path, const mvusim_run_file_options* options,
                                const char* csv_path, const char* json_path) {
    return guarded([&] {
        if (!config_path) {
            throw mvusim::ValidationError(mvusim::ErrorCode::ZeroDimension, "null path");
        }
        const mvusim::ParsedConfig parsed = mvusim::parse_config_file(config_path);
        const auto* sweep = std::get_if<mvusim::SweepSpec>(&parsed);
        if (!sweep) {
            throw mvusim::ValidationError(mvusim::ErrorCode::ShapeMismatch,
                                          "sweep expects a config file with a [sweep] section");
        }
        const mvusim::SweepRunOptions run_opts = make_run_file_options(options);
        const std::vector<mvusim::ReportRow> rows = mvusim::run_sweep(*sweep, run_opts);
        if (csv_path) mvusim::write_text_file(csv_path, mvusim::rows_to_csv(rows));
        if (json_path) {
            mvusim::write_text_file(json_path,
                                    mvusim::rows_to_json(rows, run_opts.seed, run_opts.unit));
        }
    });
}

mvusim_status mvusim_run_nid(const mvusim_nid_options* options, const char* csv_path,
                             const char* json_path, mvusim_nid_results* out_results) {
    return guarded([&] {
        mvusim::NidOptions nid_opts;
        if (options) {
            nid_opts.unit = make_options(&options->unit);
            nid_opts.seed = options->seed;
            if (options->inferences > 0) nid_opts.inferences = options->inferences;
            for (size_t i = 0; i < options->weight_file_count; ++i) {
                nid_opts.weight_files.emplace_back(options->weight_files[i]);
            }
        }
        const mvusim::NidReport report = mvusim::run_nid(nid_opts);
        if (csv_path) mvusim::write_text_file(csv_path, mvusim::nid_report_to_csv(report));
        if (json_path) mvusim::write_text_file(json_path, mvusim::nid_report_to_json(report));
        if (out_results) {
            for (size_t i = 0; i < 4 && i < report.layers.size(); ++i) {
                out_results->layer_exec_cycles[i] = report.layers[i].latency_cycles;
            }
            out_results->pipeline_end_to_end_cycles = report.pipeline_end_to_end_cycles;
            out_results->steady_state_ii = report.steady_state_ii;
        }
    });
}

mvusim_status mvusim_dump_trace(const char* config_path, int64_t vectors,
                                const mvusim_run_file_options* options,
                                const mvusim_flow_pattern* in_pattern,
                                const mvusim_flow_pattern* out_pattern, const char* trace_path) {
    return guarded([&] {
        if (!config_path || !trace_path) {
            throw mvusim::ValidationError(mvusim::ErrorCode::ZeroDimension, "null path");
        }
        const mvusim::ParsedConfig parsed = mvusim::parse_config_file(config_path);
        const auto* layer = std::get_if<mvusim::LayerSpec>(&parsed);
        if (!layer) {
            throw mvusim::ValidationError(mvusim::ErrorCode::ShapeMismatch,
                                          "trace expects a single-layer config file");
        }
        const mvusim::LayerConfig cfg = layer->validate();
        const mvusim::SweepRunOptions run_opts = make_run_file_options(options);
        std::mt19937_64 rng(run_opts.seed);
        mvusim::WeightMatrix weights =
            layer->weights_path ? mvusim::load_weights_for(cfg, *layer->weights_path)
                                : mvusim::random_weight_matrix(cfg, rng);

        mvusim::TraceOptions trace_opts;
        trace_opts.unit = run_opts.unit;
        trace_opts.in_pattern = make_pattern(in_pattern);
        trace_opts.out_pattern = make_pattern(out_pattern);
        if (trace_opts.in_pattern.kind != mvusim::FlowPattern::Kind::Always ||
            trace_opts.out_pattern.kind != mvusim::FlowPattern::Kind::Always) {
            trace_opts.max_cycles = 1u << 16;
        }
        std::ostringstream text;
        mvusim::dump_trace(cfg, weights, vectors, run_opts.seed, trace_opts, text);
        mvusim::write_text_file(trace_path, text.str());
    });
}

}  // extern "C"
