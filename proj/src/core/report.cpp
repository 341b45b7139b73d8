#include "core/report.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "core/errors.hpp"
#include "core/weightio.hpp"

namespace mvusim {

namespace {

// Steady-state cycles per streamed vector, measured from the spacing of
// vector start cycles (beats arrive SF per vector).
uint64_t measured_cycles_per_vector(const LayerConfig& cfg, const RunResult& run,
                                    int64_t vectors) {
    if (vectors >= 2) {
        const size_t sf = static_cast<size_t>(cfg.synapse_fold());
        const size_t first = 0;
        const size_t last = static_cast<size_t>(vectors - 1) * sf;
        if (last < run.input_accept_cycles.size()) {
            return (run.input_accept_cycles[last] - run.input_accept_cycles[first]) /
                   static_cast<uint64_t>(vectors - 1);
        }
    }
    return run.trace.compute_cycles / std::max<uint64_t>(1, static_cast<uint64_t>(vectors));
}

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

uint64_t point_seed(uint64_t seed, size_t index) {
    // splitmix64 step keeps per-point streams independent and reproducible.
    uint64_t z = seed + 0x9e3779b97f4a7c15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace

ReportRow make_report_row(const LayerConfig& cfg, const RunResult& run) {
    ReportRow row;
    const LayerShape& s = cfg.shape();
    row.kernel_dim = s.kernel_dim;
    row.ifm_channels = s.ifm_channels;
    row.ifm_dim = s.ifm_dim;
    row.ofm_channels = s.ofm_channels;
    row.ofm_dim = s.ofm_dim;
    row.pe = cfg.fold().pe;
    row.simd = cfg.fold().simd;
    row.datapath = datapath_type_name(cfg.datapath().type);
    row.input_bits = cfg.datapath().input_bits;
    row.weight_bits = cfg.datapath().weight_bits;

    row.synapse_fold = cfg.synapse_fold();
    row.neuron_fold = cfg.neuron_fold();
    row.weight_mem_depth = cfg.weight_mem_depth();
    row.input_buffer_depth = cfg.input_buffer_depth();
    row.weight_word_bits = cfg.weight_word_bits();
    row.total_weight_bits = cfg.total_weight_bits();
    row.input_buffer_bits = cfg.input_buffer_bits();

    // Independent re-evaluation of the derived columns; a mismatch means the
    // config module and this report disagree and the run must not be trusted.
    const int64_t rows = static_cast<int64_t>(s.kernel_dim) * s.kernel_dim * s.ifm_channels;
    const int64_t sf = rows / cfg.fold().simd;
    const int64_t nf = s.ofm_channels / cfg.fold().pe;
    const int64_t bw = cfg.datapath().weight_storage_bits();
    if (row.synapse_fold != sf || row.neuron_fold != nf || row.weight_mem_depth != sf * nf ||
        row.input_buffer_depth != sf || row.weight_word_bits != cfg.fold().simd * bw ||
        row.total_weight_bits != rows * s.ofm_channels * bw) {
        throw InternalError(ErrorCode::InternalInvariant,
                            "derived report columns disagree with the config formulas");
    }

    row.vectors_streamed = run.outputs.rows;
    row.cycles_per_vector = measured_cycles_per_vector(cfg, run, run.outputs.rows);
    row.latency_cycles = run.latency_cycles;
    row.total_cycles = run.trace.total_cycles;
    row.stall_backpressure = run.trace.stall_cycles_backpressure;
    row.stall_starvation = run.trace.stall_cycles_starvation;
    row.beats_in = run.trace.beats_in;
    row.beats_out = run.trace.beats_out;
    return row;
}

std::string rows_to_csv(const std::vector<ReportRow>& rows) {
    std::ostringstream out;
    out << "kernel_dim,ifm_channels,ifm_dim,ofm_channels,ofm_dim,pe,simd,datapath,input_bits,"
           "weight_bits,synapse_fold,neuron_fold,weight_mem_depth,input_buffer_depth,"
           "weight_word_bits,total_weight_bits,input_buffer_bits,vectors_streamed,"
           "cycles_per_vector,latency_cycles,total_cycles,stall_backpressure,stall_starvation,"
           "beats_in,beats_out\n";
    for (const ReportRow& r : rows) {
        out << r.kernel_dim << ',' << r.ifm_channels << ',' << r.ifm_dim << ',' << r.ofm_channels
            << ',' << r.ofm_dim << ',' << r.pe << ',' << r.simd << ',' << csv_quote(r.datapath)
            << ',' << r.input_bits << ',' << r.weight_bits << ',' << r.synapse_fold << ','
            << r.neuron_fold << ',' << r.weight_mem_depth << ',' << r.input_buffer_depth << ','
            << r.weight_word_bits << ',' << r.total_weight_bits << ',' << r.input_buffer_bits
            << ',' << r.vectors_streamed << ',' << r.cycles_per_vector << ',' << r.latency_cycles
            << ',' << r.total_cycles << ',' << r.stall_backpressure << ',' << r.stall_starvation
            << ',' << r.beats_in << ',' << r.beats_out << '\n';
    }
    return out.str();
}

namespace {

nlohmann::json row_to_json(const ReportRow& r) {
    return nlohmann::json{{"kernel_dim", r.kernel_dim},
                          {"ifm_channels", r.ifm_channels},
                          {"ifm_dim", r.ifm_dim},
                          {"ofm_channels", r.ofm_channels},
                          {"ofm_dim", r.ofm_dim},
                          {"pe", r.pe},
                          {"simd", r.simd},
                          {"datapath", r.datapath},
                          {"input_bits", r.input_bits},
                          {"weight_bits", r.weight_bits},
                          {"synapse_fold", r.synapse_fold},
                          {"neuron_fold", r.neuron_fold},
                          {"weight_mem_depth", r.weight_mem_depth},
                          {"input_buffer_depth", r.input_buffer_depth},
                          {"weight_word_bits", r.weight_word_bits},
                          {"total_weight_bits", r.total_weight_bits},
                          {"input_buffer_bits", r.input_buffer_bits},
                          {"vectors_streamed", r.vectors_streamed},
                          {"cycles_per_vector", r.cycles_per_vector},
                          {"latency_cycles", r.latency_cycles},
                          {"total_cycles", r.total_cycles},
                          {"stall_backpressure", r.stall_backpressure},
                          {"stall_starvation", r.stall_starvation},
                          {"beats_in", r.beats_in},
                          {"beats_out", r.beats_out}};
}

}  // namespace

std::string rows_to_json(const std::vector<ReportRow>& rows, uint64_t seed,
                         const MvuOptions& opts) {
    nlohmann::json doc;
    doc["seed"] = seed;
    doc["fifo_depth"] = opts.fifo_depth;
    doc["pipeline_depth"] = opts.pipeline_depth;
    doc["rows"] = nlohmann::json::array();
    for (const ReportRow& r : rows) doc["rows"].push_back(row_to_json(r));
    return doc.dump(2) + "\n";
}

ReportRow run_single(const LayerConfig& cfg, const WeightMatrix& weights,
                     const SweepRunOptions& options) {
    std::mt19937_64 rng(options.seed);
    const int64_t vectors =
        options.vectors > 0 ? options.vectors : cfg.shape().matrix_cols();
    const ImageMatrix image = random_image_matrix(cfg, vectors, rng);
    RunOptions run_opts;
    run_opts.unit = options.unit;
    const RunResult run = run_layer(cfg, weights, image, run_opts);
    if (!run.completed) {
        throw InternalError(ErrorCode::InternalInvariant,
                            "unconstrained run did not complete within its cycle budget");
    }
    return make_report_row(cfg, run);
}

std::vector<ReportRow> run_sweep(const SweepSpec& spec, const SweepRunOptions& options) {
    std::vector<ReportRow> rows;
    size_t index = 0;
    for (const DatapathKind& kind : spec.kinds) {
        for (const int64_t value : spec.values) {
            const LayerConfig cfg = spec.config_for(value, kind);
            std::mt19937_64 rng(point_seed(options.seed, index));
            SweepRunOptions point = options;
            point.seed = point_seed(options.seed, index);
            rows.push_back(run_single(cfg, random_weight_matrix(cfg, rng), point));
            ++index;
        }
    }
    return rows;
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    out << contents;
    if (!out) throw IoError("write failed: " + path);
}

std::vector<LayerConfig> nid_layer_configs() {
    const DatapathKind kind = DatapathKind::standard(2, 2);
    return {
        LayerConfig::validate(LayerShape::fully_connected(600, 64), {64, 50}, kind),
        LayerConfig::validate(LayerShape::fully_connected(64, 64), {16, 32}, kind),
        LayerConfig::validate(LayerShape::fully_connected(64, 64), {16, 32}, kind),
        LayerConfig::validate(LayerShape::fully_connected(64, 1), {1, 8}, kind),
    };
}

NidReport run_nid(const NidOptions& options) {
    const std::vector<LayerConfig> configs = nid_layer_configs();
    if (!options.weight_files.empty() && options.weight_files.size() != configs.size()) {
        throw ValidationError(ErrorCode::IncompatibleLayers,
                              "expected one weight file per NID layer (4)");
    }

    std::mt19937_64 rng(options.seed);
    std::vector<WeightMatrix> weights;
    for (size_t i = 0; i < configs.size(); ++i) {
        if (options.weight_files.empty()) {
            weights.push_back(random_weight_matrix(configs[i], rng));
        } else {
            weights.push_back(load_weights_for(configs[i], options.weight_files[i]));
        }
    }

    NidReport report;
    report.seed = options.seed;
    report.options = options.unit;
    report.inferences = options.inferences;

    // Per-layer single-inference latency, each layer standalone with an
    // unconstrained source and sink (the paper's per-layer measurement).
    for (size_t i = 0; i < configs.size(); ++i) {
        const LayerConfig& cfg = configs[i];
        const ImageMatrix image = random_image_matrix(cfg, 1, rng);
        RunOptions run_opts;
        run_opts.unit = options.unit;
        const RunResult run = run_layer(cfg, weights[i], image, run_opts);
        if (!run.completed) {
            throw InternalError(ErrorCode::InternalInvariant, "NID layer run did not complete");
        }
        NidLayerResult layer;
        layer.synapse_fold = cfg.synapse_fold();
        layer.neuron_fold = cfg.neuron_fold();
        layer.fold_product = cfg.weight_mem_depth();
        layer.latency_cycles = run.latency_cycles;
        report.layers.push_back(layer);
    }

    Pipeline pipeline = Pipeline::compose(configs, weights, options.unit);

    // Single inference end to end.
    {
        std::vector<std::vector<int64_t>> one(1);
        const ImageMatrix image = random_image_matrix(configs[0], 1, rng);
        one[0].assign(image.data.begin(), image.data.end());
        const PipelineRunResult run = pipeline.run(one);
        if (!run.completed) {
            throw InternalError(ErrorCode::InternalInvariant, "NID pipeline run did not complete");
        }
        report.pipeline_end_to_end_cycles = run.end_to_end_cycles;
    }

    // Throughput: stream `inferences` vectors and take the steady spacing of
    // vector starts at the source.
    if (options.inferences >= 2) {
        pipeline.reset();
        const ImageMatrix image = random_image_matrix(configs[0], options.inferences, rng);
        std::vector<std::vector<int64_t>> vectors(static_cast<size_t>(options.inferences));
        for (int64_t j = 0; j < options.inferences; ++j) {
            vectors[static_cast<size_t>(j)].resize(static_cast<size_t>(image.rows));
            for (int64_t r = 0; r < image.rows; ++r) {
                vectors[static_cast<size_t>(j)][static_cast<size_t>(r)] = image.at(r, j);
            }
        }
        const PipelineRunResult run = pipeline.run(vectors);
        if (!run.completed) {
            throw InternalError(ErrorCode::InternalInvariant, "NID throughput run incomplete");
        }
        const size_t sf0 = static_cast<size_t>(configs[0].synapse_fold());
        const size_t v_last = static_cast<size_t>(options.inferences - 1);
        const uint64_t first = run.input_accept_cycles[(v_last - 1) * sf0];
        const uint64_t second = run.input_accept_cycles[v_last * sf0];
        report.steady_state_ii = second - first;
    }
    return report;
}

std::string nid_report_to_json(const NidReport& report) {
    nlohmann::json doc;
    doc["seed"] = report.seed;
    doc["fifo_depth"] = report.options.fifo_depth;
    doc["pipeline_depth"] = report.options.pipeline_depth;
    doc["inferences"] = report.inferences;
    doc["pipeline_end_to_end_cycles"] = report.pipeline_end_to_end_cycles;
    doc["steady_state_ii"] = report.steady_state_ii;
    doc["layers"] = nlohmann::json::array();
    for (size_t i = 0; i < report.layers.size(); ++i) {
        const NidLayerResult& l = report.layers[i];
        doc["layers"].push_back({{"layer", i},
                                 {"synapse_fold", l.synapse_fold},
                                 {"neuron_fold", l.neuron_fold},
                                 {"fold_product", l.fold_product},
                                 {"exec_cycles", l.latency_cycles}});
    }
    return doc.dump(2) + "\n";
}

std::string nid_report_to_csv(const NidReport& report) {
    std::ostringstream out;
    out << "layer,synapse_fold,neuron_fold,fold_product,exec_cycles\n";
    for (size_t i = 0; i < report.layers.size(); ++i) {
        const NidLayerResult& l = report.layers[i];
        out << i << ',' << l.synapse_fold << ',' << l.neuron_fold << ',' << l.fold_product << ','
            << l.latency_cycles << '\n';
    }
    return out.str();
}

std::string nid_report_to_text(const NidReport& report) {
    std::ostringstream out;
    out << "NID 4-layer MLP (600-64-64-64-1), fifo_depth=" << report.options.fifo_depth
        << " pipeline_depth=" << report.options.pipeline_depth << " seed=" << report.seed << "\n";
    out << std::left << std::setw(8) << "layer" << std::setw(6) << "SF" << std::setw(6) << "NF"
        << std::setw(8) << "SF*NF" << "exec cycles\n";
    for (size_t i = 0; i < report.layers.size(); ++i) {
        const NidLayerResult& l = report.layers[i];
        out << std::left << std::setw(8) << i << std::setw(6) << l.synapse_fold << std::setw(6)
            << l.neuron_fold << std::setw(8) << l.fold_product << l.latency_cycles << "\n";
    }
    out << "pipeline end-to-end cycles (1 inference): " << report.pipeline_end_to_end_cycles
        << "\n";
    if (report.inferences >= 2) {
        out << "steady-state cycles per inference (" << report.inferences
            << " inferences): " << report.steady_state_ii << "\n";
    }
    return out.str();
}

void dump_trace(const LayerConfig& cfg, const WeightMatrix& weights, int64_t vectors,
                uint64_t seed, const TraceOptions& options, std::ostream& out) {
    out << "# mvusim trace layer=\"" << cfg.describe() << "\" fifo_depth=" << options.unit.fifo_depth
        << " pipeline_depth=" << options.unit.pipeline_depth << " seed=" << seed << "\n";
    if (vectors <= 0) return;

    std::mt19937_64 rng(seed);
    const ImageMatrix image = random_image_matrix(cfg, vectors, rng);
    RunOptions run_opts;
    run_opts.unit = options.unit;
    run_opts.in_pattern = options.in_pattern;
    run_opts.out_pattern = options.out_pattern;
    run_opts.max_cycles = options.max_cycles;
    run_opts.observer = [&out](const TraceRecord& rec) {
        out << "cycle=" << rec.cycle << " state=" << fsm_state_name(rec.state)
            << " in_tvalid=" << rec.in_tvalid << " in_tready=" << rec.in_tready
            << " out_tvalid=" << rec.out_tvalid << " out_tready=" << rec.out_tready
            << " tile=" << rec.tile << " phase=" << rec.phase << "\n";
    };
    run_layer(cfg, weights, image, run_opts);
}

}  // namespace mvusim
