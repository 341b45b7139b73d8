#include <filesystem>
#include <random>
#include <sstream>

#include "doctest.h"

#include "core/configfile.hpp"
#include "core/report.hpp"
#include "core/weightio.hpp"

using namespace mvusim;

namespace {

SweepSpec make_channel_sweep() {
    const char* text = R"([layer]
ifm_channels = *
ifm_dim = 8
ofm_channels = 64
kernel_dim = 4
pe = 2
simd = 2
datapath = standard
input_bits = 4
weight_bits = 4

[sweep]
values = 2, 4, 8
)";
    return std::get<SweepSpec>(parse_config_text(text));
}

}  // namespace

TEST_CASE("report rows carry the derived formulas") {
    std::mt19937_64 rng(401);
    const LayerConfig cfg = LayerConfig::validate(LayerShape::fully_connected(16, 8), {4, 4},
                                                  DatapathKind::standard(4, 4));
    SweepRunOptions opts;
    opts.vectors = 4;
    const ReportRow row = run_single(cfg, random_weight_matrix(cfg, rng), opts);
    CHECK(row.synapse_fold == 4);
    CHECK(row.neuron_fold == 2);
    CHECK(row.weight_mem_depth == 8);
    CHECK(row.input_buffer_depth == 4);
    CHECK(row.weight_word_bits == 16);
    CHECK(row.cycles_per_vector == 8);
    CHECK(row.vectors_streamed == 4);
    CHECK(row.latency_cycles == 8 * 4 + 5);
    CHECK(row.stall_backpressure == 0);
}

TEST_CASE("sweeps are deterministic for a fixed seed") {
    const SweepSpec spec = make_channel_sweep();
    SweepRunOptions opts;
    opts.seed = 99;
    opts.vectors = 3;
    const std::vector<ReportRow> a = run_sweep(spec, opts);
    const std::vector<ReportRow> b = run_sweep(spec, opts);
    CHECK(rows_to_csv(a) == rows_to_csv(b));
    CHECK(rows_to_json(a, opts.seed, opts.unit) == rows_to_json(b, opts.seed, opts.unit));

    opts.seed = 100;
    const std::vector<ReportRow> c = run_sweep(spec, opts);
    CHECK(rows_to_csv(a) == rows_to_csv(c));  // cycle columns do not depend on data values
}

TEST_CASE("channel sweep grows cycles linearly and buffer depth with I_c") {
    const SweepSpec spec = make_channel_sweep();
    SweepRunOptions opts;
    opts.vectors = 3;
    const std::vector<ReportRow> rows = run_sweep(spec, opts);
    REQUIRE(rows.size() == 3);
    for (size_t i = 0; i < rows.size(); ++i) {
        const ReportRow& r = rows[i];
        CHECK(r.cycles_per_vector == static_cast<uint64_t>(r.synapse_fold * r.neuron_fold));
        CHECK(r.input_buffer_depth == 16 * r.ifm_channels / 2);
        if (i > 0) {
            // doubling channels doubles both the fold product and the buffer
            CHECK(r.cycles_per_vector == 2 * rows[i - 1].cycles_per_vector);
            CHECK(r.input_buffer_depth == 2 * rows[i - 1].input_buffer_depth);
        }
    }
}

TEST_CASE("csv output has a header and one line per row") {
    const SweepSpec spec = make_channel_sweep();
    SweepRunOptions opts;
    opts.vectors = 2;
    const std::string csv = rows_to_csv(run_sweep(spec, opts));
    size_t lines = 0;
    for (char c : csv) lines += c == '\n';
    CHECK(lines == 4);  // header + 3 points
    CHECK(csv.rfind("kernel_dim,ifm_channels,", 0) == 0);
}

TEST_CASE("the NID report reproduces the published execution cycles") {
    NidOptions opts;
    opts.inferences = 50;
    const NidReport report = run_nid(opts);
    REQUIRE(report.layers.size() == 4);
    CHECK(report.layers[0].latency_cycles == 17);
    CHECK(report.layers[1].latency_cycles == 13);
    CHECK(report.layers[2].latency_cycles == 13);
    CHECK(report.layers[3].latency_cycles == 13);
    CHECK(report.layers[0].fold_product == 12);
    CHECK(report.steady_state_ii == 12);

    const std::string text = nid_report_to_text(report);
    CHECK(text.find("pipeline end-to-end cycles") != std::string::npos);
    const std::string csv = nid_report_to_csv(report);
    CHECK(csv.find("17") != std::string::npos);
}

TEST_CASE("NID cycle counts do not depend on the weight values") {
    NidOptions a;
    a.seed = 1;
    a.inferences = 10;
    NidOptions b;
    b.seed = 77;
    b.inferences = 10;
    const NidReport ra = run_nid(a);
    const NidReport rb = run_nid(b);
    for (size_t i = 0; i < 4; ++i) {
        CHECK(ra.layers[i].latency_cycles == rb.layers[i].latency_cycles);
    }
    CHECK(ra.pipeline_end_to_end_cycles == rb.pipeline_end_to_end_cycles);
    CHECK(ra.steady_state_ii == rb.steady_state_ii);
}

TEST_CASE("NID accepts user weight files and reports the same cycles") {
    namespace fs = std::filesystem;
    const fs::path dir =
        fs::temp_directory_path() / ("mvusim_nidw_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);

    std::mt19937_64 rng(431);
    NidOptions opts;
    opts.inferences = 10;
    size_t index = 0;
    for (const LayerConfig& cfg : nid_layer_configs()) {
        const WeightMatrix w = random_weight_matrix(cfg, rng);
        const std::string path = (dir / ("layer" + std::to_string(index++) + ".mvuw")).string();
        save_weight_matrix_binary(w, path, cfg.datapath().weight_storage_bits(), true);
        opts.weight_files.push_back(path);
    }
    const NidReport from_files = run_nid(opts);
    CHECK(from_files.layers[0].latency_cycles == 17);
    CHECK(from_files.layers[3].latency_cycles == 13);
    CHECK(from_files.steady_state_ii == 12);
    fs::remove_all(dir);
}

TEST_CASE("trace dumps show the steady state and honor empty input") {
    std::mt19937_64 rng(409);
    const LayerConfig cfg = LayerConfig::validate(LayerShape::fully_connected(4, 2), {2, 4},
                                                  DatapathKind::standard(4, 4));
    const WeightMatrix w = random_weight_matrix(cfg, rng);

    SUBCASE("unfolded free flow accepts a beat every cycle") {
        std::ostringstream out;
        dump_trace(cfg, w, 3, 7, {}, out);
        const std::string text = out.str();
        CHECK(text.rfind("# mvusim trace", 0) == 0);
        CHECK(text.find("cycle=0 state=Idle in_tvalid=1 in_tready=1") != std::string::npos);
        CHECK(text.find("cycle=1 state=Write in_tvalid=1 in_tready=1") != std::string::npos);
        CHECK(text.find("cycle=2 state=Write in_tvalid=1 in_tready=1") != std::string::npos);
    }

    SUBCASE("a stalled sink pushes the unit into Idle") {
        TraceOptions opts;
        opts.out_pattern = FlowPattern::never();
        opts.max_cycles = 40;
        std::ostringstream out;
        dump_trace(cfg, w, 16, 7, opts, out);  // more beats than the unit can absorb
        CHECK(out.str().find("state=Idle in_tvalid=1 in_tready=0") != std::string::npos);
    }

    SUBCASE("zero vectors emit only the header") {
        std::ostringstream out;
        dump_trace(cfg, w, 0, 7, {}, out);
        std::string text = out.str();
        CHECK(text.rfind("# mvusim trace", 0) == 0);
        CHECK(std::count(text.begin(), text.end(), '\n') == 1);
    }
}
