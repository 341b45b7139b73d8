// mvusim command-line front end. Thin by design: argument parsing and
// printing live here, everything else goes through the shared library's
// C API (include/mvusim/mvusim.h).

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "mvusim/mvusim.h"

namespace {

struct PatternArgs {
    std::string kind = "always";  // always | never | random
    double density = 0.5;
    uint64_t seed = 1;

    mvusim_flow_pattern to_c() const {
        mvusim_flow_pattern p{};
        if (kind == "never") p.kind = 1;
        else if (kind == "random") p.kind = 2;
        else p.kind = 0;
        p.density = density;
        p.seed = seed;
        return p;
    }
};

int fail(mvusim_status status) {
    std::fprintf(stderr, "error: %s\n", mvusim_last_error());
    return static_cast<int>(status);
}

void add_unit_options(CLI::App* cmd, mvusim_run_file_options& opts) {
    cmd->add_option("--fifo-depth", opts.unit.fifo_depth, "output FIFO depth in words");
    cmd->add_option("--pipeline-depth", opts.unit.pipeline_depth,
                    "result pipeline register stages (latency d)");
    cmd->add_option("--seed", opts.seed, "PRNG seed for generated stimulus");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cycle-accurate simulator for FINN-style matrix-vector compute units"};
    app.require_subcommand(1);

    // validate
    std::string validate_path;
    CLI::App* validate = app.add_subcommand("validate", "check a config file, print derived parameters");
    validate->add_option("config", validate_path, "config file")->required();

    // run
    std::string run_path;
    std::string run_out = "run_report";
    mvusim_run_file_options run_opts{{0, 0}, 1, 0};
    CLI::App* run = app.add_subcommand("run", "run a single-layer config, emit a report");
    run->add_option("config", run_path, "single-layer config file")->required();
    run->add_option("-o,--output", run_out, "report basename (.csv and .json)");
    run->add_option("--vectors", run_opts.vectors, "vectors to stream (default: full image)");
    add_unit_options(run, run_opts);

    // sweep
    std::string sweep_path;
    std::string sweep_out = "sweep_report";
    mvusim_run_file_options sweep_opts{{0, 0}, 1, 0};
    CLI::App* sweep = app.add_subcommand("sweep", "run a parameter sweep, emit CSV + JSON reports");
    sweep->add_option("config", sweep_path, "sweep config file")->required();
    sweep->add_option("-o,--output", sweep_out, "report basename (.csv and .json)");
    sweep->add_option("--vectors", sweep_opts.vectors, "vectors per point (default: full image)");
    add_unit_options(sweep, sweep_opts);

    // nid
    std::string nid_out = "nid_report";
    mvusim_run_file_options nid_unit{{0, 0}, 1, 0};
    int64_t nid_inferences = 100;
    std::vector<std::string> nid_weights;
    CLI::App* nid = app.add_subcommand("nid", "run the 4-layer intrusion-detection MLP");
    nid->add_option("-o,--output", nid_out, "report basename (.csv and .json)");
    nid->add_option("--inferences", nid_inferences, "inferences for the throughput measurement");
    nid->add_option("--weights", nid_weights, "four weight matrix files (default: seeded random)")
        ->expected(4);
    add_unit_options(nid, nid_unit);

    // trace
    std::string trace_path;
    std::string trace_out = "trace.txt";
    int64_t trace_vectors = 1;
    mvusim_run_file_options trace_opts{{0, 0}, 1, 0};
    PatternArgs trace_in, trace_out_pattern;
    CLI::App* trace = app.add_subcommand("trace", "dump a per-cycle trace of one layer");
    trace->add_option("config", trace_path, "single-layer config file")->required();
    trace->add_option("-o,--output", trace_out, "trace file");
    trace->add_option("--vectors", trace_vectors, "vectors to stream");
    trace->add_option("--in-pattern", trace_in.kind, "input availability: always|never|random");
    trace->add_option("--in-density", trace_in.density, "P(valid) for random input pattern");
    trace->add_option("--in-seed", trace_in.seed, "seed for random input pattern");
    trace->add_option("--out-pattern", trace_out_pattern.kind,
                      "output readiness: always|never|random");
    trace->add_option("--out-density", trace_out_pattern.density,
                      "P(ready) for random output pattern");
    trace->add_option("--out-seed", trace_out_pattern.seed, "seed for random output pattern");
    add_unit_options(trace, trace_opts);

    CLI11_PARSE(app, argc, argv);

    if (validate->parsed()) {
        char buffer[8192];
        const mvusim_status status = mvusim_validate_file(validate_path.c_str(), buffer,
                                                          sizeof buffer);
        if (status != MVUSIM_OK) return fail(status);
        std::fputs(buffer, stdout);
        std::puts("ok");
        return 0;
    }

    if (run->parsed()) {
        const std::string csv = run_out + ".csv";
        const std::string json = run_out + ".json";
        const mvusim_status status =
            mvusim_run_file(run_path.c_str(), &run_opts, csv.c_str(), json.c_str());
        if (status != MVUSIM_OK) return fail(status);
        std::printf("report written to %s and %s\n", csv.c_str(), json.c_str());
        return 0;
    }

    if (sweep->parsed()) {
        const std::string csv = sweep_out + ".csv";
        const std::string json = sweep_out + ".json";
        const mvusim_status status =
            mvusim_sweep_file(sweep_path.c_str(), &sweep_opts, csv.c_str(), json.c_str());
        if (status != MVUSIM_OK) return fail(status);
        std::printf("sweep report written to %s and %s\n", csv.c_str(), json.c_str());
        return 0;
    }

    if (nid->parsed()) {
        mvusim_nid_options opts{};
        opts.unit = nid_unit.unit;
        opts.seed = nid_unit.seed;
        opts.inferences = nid_inferences;
        std::vector<const char*> files;
        for (const auto& f : nid_weights) files.push_back(f.c_str());
        opts.weight_files = files.empty() ? nullptr : files.data();
        opts.weight_file_count = files.size();

        mvusim_nid_results results{};
        const std::string csv = nid_out + ".csv";
        const std::string json = nid_out + ".json";
        const mvusim_status status = mvusim_run_nid(&opts, csv.c_str(), json.c_str(), &results);
        if (status != MVUSIM_OK) return fail(status);
        std::puts("layer  exec cycles");
        for (int i = 0; i < 4; ++i) {
            std::printf("%-6d %llu\n", i,
                        static_cast<unsigned long long>(results.layer_exec_cycles[i]));
        }
        std::printf("pipeline end-to-end cycles: %llu\n",
                    static_cast<unsigned long long>(results.pipeline_end_to_end_cycles));
        std::printf("steady-state cycles per inference: %llu\n",
                    static_cast<unsigned long long>(results.steady_state_ii));
        std::printf("report written to %s and %s\n", csv.c_str(), json.c_str());
        return 0;
    }

    if (trace->parsed()) {
        const mvusim_flow_pattern in_p = trace_in.to_c();
        const mvusim_flow_pattern out_p = trace_out_pattern.to_c();
        const mvusim_status status = mvusim_dump_trace(trace_path.c_str(), trace_vectors,
                                                       &trace_opts, &in_p, &out_p,
                                                       trace_out.c_str());
        if (status != MVUSIM_OK) return fail(status);
        std::printf("trace written to %s\n", trace_out.c_str());
        return 0;
    }

    return 0;
}
