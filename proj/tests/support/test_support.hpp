#pragma once

// Shared testbench machinery: independently coded reference models, random
// valid-config generation, and a protocol-checking run harness. Nothing here
// may call into the simulator's own decision logic beyond stepping it.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/lowering.hpp"
#include "core/oracle.hpp"
#include "core/pipeline.hpp"
#include "core/stream.hpp"

namespace testsupport {

using namespace mvusim;

// Transcription of the control state diagram kept separate from the
// implementation: edges evaluated as explicit predicates, priorities spelled
// out (resume-before-start in Idle, stall-before-advance in Write,
// continue-before-stop in Read).
inline FsmState reference_fsm(FsmState state, bool tvalid, bool tready, bool full, bool done) {
    const bool idle_to_write = tvalid && tready;
    const bool idle_to_read = tready && full;
    const bool write_to_idle = !tvalid || !tready;
    const bool write_to_read = tready && full;
    const bool read_to_write = tvalid && done;
    const bool read_to_idle = !tready || done;
    switch (state) {
        case FsmState::Idle:
            return idle_to_read ? FsmState::Read
                                : (idle_to_write ? FsmState::Write : FsmState::Idle);
        case FsmState::Write:
            return write_to_idle ? FsmState::Idle
                                 : (write_to_read ? FsmState::Read : FsmState::Write);
        case FsmState::Read:
            return read_to_write ? FsmState::Write
                                 : (read_to_idle ? FsmState::Idle : FsmState::Read);
    }
    return FsmState::Idle;
}

struct ConfigLimits {
    int max_ifm_dim = 8;
    int max_kernel = 4;
    int max_ifm_channels = 16;
    int max_ofm_channels = 16;
    int max_bits = 4;
};

inline int random_divisor(std::mt19937_64& rng, int64_t n) {
    std::vector<int64_t> divisors;
    for (int64_t d = 1; d * d <= n; ++d) {
        if (n % d == 0) {
            divisors.push_back(d);
            divisors.push_back(n / d);
        }
    }
    return static_cast<int>(divisors[rng() % divisors.size()]);
}

inline DatapathKind random_kind(std::mt19937_64& rng, int max_bits) {
    switch (rng() % 3) {
        case 0: return DatapathKind::xnor();
        case 1:
            return DatapathKind::binary_weight(1 + static_cast<int>(rng() % max_bits));
        default: {
            const int ib = 1 + static_cast<int>(rng() % max_bits);
            const int wb = 2 + static_cast<int>(rng() % std::max(1, max_bits - 1));
            return DatapathKind::standard(ib, wb);
        }
    }
}

inline LayerConfig random_config(std::mt19937_64& rng, const ConfigLimits& lim = {}) {
    const int id = 1 + static_cast<int>(rng() % lim.max_ifm_dim);
    const int kd = 1 + static_cast<int>(rng() % std::min(lim.max_kernel, id));
    const int ic = 1 + static_cast<int>(rng() % lim.max_ifm_channels);
    const int oc = 1 + static_cast<int>(rng() % lim.max_ofm_channels);
    LayerShape shape{kd, ic, id, oc, id - kd + 1};
    FoldConfig fold{random_divisor(rng, oc), random_divisor(rng, int64_t(kd) * kd * ic)};
    return LayerConfig::validate(shape, fold, random_kind(rng, lim.max_bits));
}

// Oracle-side dot products for a whole image: one reference_mvp call per
// column, arranged like the simulator's output matrix.
inline OutputMatrix oracle_outputs(const WeightMatrix& weights, const ImageMatrix& image,
                                   const DatapathKind& kind) {
    OutputMatrix out(image.cols, weights.rows);
    for (int64_t j = 0; j < image.cols; ++j) {
        std::vector<int64_t> x(static_cast<size_t>(image.rows));
        for (int64_t r = 0; r < image.rows; ++r) x[static_cast<size_t>(r)] = image.at(r, j);
        const std::vector<int64_t> y = oracle::reference_mvp(weights, x, kind);
        for (int64_t r = 0; r < weights.rows; ++r) out.at(j, r) = y[static_cast<size_t>(r)];
    }
    return out;
}

// Sequential application of per-layer oracles with the same inter-layer
// requantization rule the pipeline wiring uses.
inline std::vector<std::vector<int64_t>> chained_oracle(
    const std::vector<LayerConfig>& configs, const std::vector<WeightMatrix>& weights,
    const std::vector<std::vector<int64_t>>& inputs) {
    std::vector<std::vector<int64_t>> outputs;
    for (const auto& input : inputs) {
        std::vector<int64_t> x = input;
        for (size_t i = 0; i < configs.size(); ++i) {
            std::vector<int64_t> y =
                oracle::reference_mvp(weights[i], x, configs[i].datapath());
            if (i + 1 < configs.size()) {
                for (auto& v : y) v = requantize(v, configs[i + 1].datapath());
            }
            x = std::move(y);
        }
        outputs.push_back(std::move(x));
    }
    return outputs;
}

struct CheckedRun {
    bool completed = false;
    OutputMatrix outputs;
    CycleTrace trace;
    std::vector<uint64_t> input_accept_cycles;
    std::vector<uint64_t> output_cycles;
    uint64_t violations = 0;
    std::string first_violation;
};

// Steps a fresh unit over the image while checking, every cycle:
//  - the FSM transition matches reference_fsm on the unit's own inputs,
//  - out.tvalid stays asserted with stable tdata until the beat transfers,
//  - the input buffer never holds more than SF beats and the FSM is only in
//    Read with a completely buffered vector,
//  - FIFO and pipeline occupancy never exceed their bounds.
inline CheckedRun checked_run_layer(const LayerConfig& cfg, const WeightMatrix& weights,
                                    const ImageMatrix& image, const RunOptions& options) {
    MvuUnit unit(cfg, weights, options.unit);
    StreamSource source(pack_input_stream(image, cfg.fold(), cfg.datapath()),
                        options.in_pattern);
    StreamSink sink(options.out_pattern);
    StreamChannel in(static_cast<int>(cfg.input_word_bits()));
    StreamChannel out(static_cast<int>(cfg.output_word_bits()));

    CheckedRun result;
    auto violation = [&result](const std::string& what) {
        if (result.violations == 0) result.first_violation = what;
        ++result.violations;
    };

    const uint64_t expected_words =
        static_cast<uint64_t>(image.cols) * static_cast<uint64_t>(cfg.neuron_fold());
    uint64_t max_cycles = options.max_cycles;
    if (max_cycles == 0) {
        max_cycles = 1024 + 32 * static_cast<uint64_t>(image.cols) *
                                static_cast<uint64_t>(cfg.weight_mem_depth());
    }

    bool held_valid = false;
    BitWord held_data;
    uint64_t cycle = 0;
    while (sink.received().size() < expected_words && cycle < max_cycles) {
        in.begin_cycle();
        out.begin_cycle();
        source.drive(in);
        sink.drive(out);
        unit.drive(in, out);

        if (held_valid) {
            if (!out.tvalid) violation("out.tvalid deasserted before transfer");
            else if (!(out.tdata == held_data)) violation("out.tdata changed before transfer");
        }

        const FsmState before = unit.fsm_state();
        if (before == FsmState::Read && unit.buffer_written() != cfg.input_buffer_depth()) {
            violation("Read state without a completely buffered vector");
        }
        unit.commit(in, out);
        source.commit(in);
        sink.commit(out);

        const FsmInputs sig = unit.last_fsm_inputs();
        if (unit.fsm_state() !=
            reference_fsm(before, sig.tvalid, sig.tready, sig.inp_buf_full, sig.comp_done)) {
            violation("FSM transition off the reference table");
        }
        if (unit.buffer_written() > cfg.input_buffer_depth()) {
            violation("input buffer overfilled");
        }
        if (unit.fifo_occupancy() > options.unit.fifo_depth) violation("FIFO overfull");
        if (unit.pipeline_occupancy() > options.unit.pipeline_depth - 1) {
            violation("pipeline overfull");
        }

        held_valid = out.tvalid && !out.tready;
        if (held_valid) held_data = out.tdata;
        ++cycle;
    }

    result.completed = sink.received().size() == expected_words;
    result.trace = unit.trace();
    result.input_accept_cycles = source.accept_cycles();
    result.output_cycles = sink.receive_cycles();

    const int64_t nf = cfg.neuron_fold();
    const int pe = cfg.fold().pe;
    const int acc_bits = cfg.accumulator_bits();
    result.outputs = OutputMatrix(image.cols, cfg.shape().ofm_channels);
    for (size_t k = 0; k < sink.received().size(); ++k) {
        const int64_t vec = static_cast<int64_t>(k) / nf;
        const int64_t tile = static_cast<int64_t>(k) % nf;
        for (int p = 0; p < pe; ++p) {
            result.outputs.at(vec, tile * pe + p) = sink.received()[k].lane_signed(p, acc_bits);
        }
    }
    return result;
}

}  // namespace testsupport
