#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "core/bitword.hpp"
#include "core/config.hpp"
#include "core/datapath.hpp"
#include "core/lowering.hpp"
#include "core/memory.hpp"

namespace mvusim {

// One ready/valid channel for a single simulated cycle. A beat transfers in a
// cycle iff tvalid && tready; tdata is meaningful only while tvalid. ACLK and
// ARESETn map onto the simulator's step and reset calls.
struct StreamChannel {
    int data_bits = 0;
    bool tvalid = false;
    bool tready = false;
    BitWord tdata;

    explicit StreamChannel(int bits = 0) : data_bits(bits), tdata(bits) {}

    bool fired() const { return tvalid && tready; }

    // Start-of-cycle wire reset; every driver re-asserts its half.
    void begin_cycle() {
        tvalid = false;
        tready = false;
    }
};

// Control states of the stream unit: Idle stalls, Write accepts input beats
// while computing the first output tile, Read re-uses the buffered vector for
// the remaining tiles.
enum class FsmState { Idle = 0, Write = 1, Read = 2 };

const char* fsm_state_name(FsmState state);

// The three-state Mealy transition function. INP_BUF_FULL means the input
// buffer holds a complete vector whose tiles are not finished yet; COMP_DONE
// means the last compute phase of the current vector completes this cycle.
// Overlapping edges resolve as: Idle prefers resuming an unfinished vector
// (Read) over starting a new one; Write stalls on a missing handshake before
// advancing; Read->Write wins over Read->Idle so back-to-back vectors stream
// without a dead cycle.
FsmState fsm_step(FsmState state, bool tvalid, bool tready, bool inp_buf_full, bool comp_done);

// Monotone per-run counters; the basis of all performance reporting.
struct CycleTrace {
    uint64_t total_cycles = 0;
    uint64_t beats_in = 0;
    uint64_t beats_out = 0;
    uint64_t stall_cycles_backpressure = 0;
    uint64_t stall_cycles_starvation = 0;
    uint64_t compute_cycles = 0;
    uint64_t state_cycles[3] = {0, 0, 0};

    uint64_t state_occupancy(FsmState s) const { return state_cycles[static_cast<int>(s)]; }
};

struct MvuOptions {
    // Words the output FIFO can hold; bounds how far computation runs ahead
    // of a stalled consumer.
    int fifo_depth = 4;
    // Register stages between a PE issuing a tile and the word becoming
    // transferable (SIMD, adder tree, accumulator, FIFO). Calibrated so a
    // single vector's latency is SF*NF + pipeline_depth cycles.
    int pipeline_depth = 5;
};

// Signals fed to fsm_step on the most recent cycle; exposed for protocol
// checkers.
struct FsmInputs {
    bool tvalid = false;
    bool tready = false;
    bool inp_buf_full = false;
    bool comp_done = false;
};

// Per-cycle observation record, also the payload of the trace dump.
struct TraceRecord {
    uint64_t cycle = 0;
    FsmState state = FsmState::Idle;
    bool in_tvalid = false;
    bool in_tready = false;
    bool out_tvalid = false;
    bool out_tready = false;
    int64_t tile = 0;
    int64_t phase = 0;
    bool compute_fired = false;
    bool beat_in = false;
    bool beat_out = false;
};

// The stream unit: AXI-Stream control FSM, input buffer, PE accumulators,
// result pipeline and output FIFO. It performs the main computation but does
// not own weights; the enclosing batch unit supplies the schedule position
// and the per-PE weight words every cycle.
//
// Each simulated cycle is two-phase. drive() resolves the combinational
// signals the unit owns (in.tready, out.tvalid/tdata) from start-of-cycle
// state; commit() then applies the cycle: beat transfers, the PE compute
// step, pipeline/FIFO movement, the FSM transition and trace counters.
// The caller must drive in.tvalid/in.tdata and out.tready before drive().
class MvuStreamUnit {
public:
    MvuStreamUnit(const LayerConfig& cfg, const MvuOptions& opts);

    void drive(StreamChannel& in, StreamChannel& out, const SchedulePoint& point) const;
    // Runs one clock with the weight words for `point`; returns true when
    // the compute step fired (the batch control advances its address then).
    bool commit(StreamChannel& in, StreamChannel& out, const SchedulePoint& point,
                std::span<const BitWord> weight_words);

    void reset();

    const CycleTrace& trace() const { return trace_; }
    FsmState fsm_state() const { return fsm_; }
    uint64_t cycle_index() const { return cycle_; }
    const FsmInputs& last_fsm_inputs() const { return last_fsm_inputs_; }
    int64_t fifo_occupancy() const { return static_cast<int64_t>(fifo_.size()); }
    int64_t pipeline_occupancy() const;
    int64_t buffer_written() const { return buffer_.written(); }
    bool drained() const { return fifo_.empty() && pipeline_occupancy() == 0; }

    void set_trace_observer(std::function<void(const TraceRecord&)> observer) {
        observer_ = std::move(observer);
    }

private:
    struct CycleDecision {
        bool write_phase = false;
        bool out_fire = false;
        bool can_compute = false;
        bool do_write = false;
        bool do_compute = false;
        bool comp_done = false;
        bool inp_buf_full = false;
    };

    CycleDecision resolve(const StreamChannel& in, const StreamChannel& out,
                          const SchedulePoint& point) const;
    bool entry_free_after_shift(bool out_fire) const;
    void shift_pipeline(bool out_fire);
    void push_result();

    LayerConfig cfg_;
    MvuOptions opts_;
    InputBuffer buffer_;
    std::vector<Accumulator> accumulators_;
    // Result path: pipeline_depth-1 stall-capable register stages, then the
    // FIFO whose head drives out.tvalid.
    std::vector<std::optional<BitWord>> pipeline_;
    std::deque<BitWord> fifo_;
    FsmState fsm_ = FsmState::Idle;
    FsmInputs last_fsm_inputs_;
    CycleTrace trace_;
    uint64_t cycle_ = 0;
    std::function<void(const TraceRecord&)> observer_;
};

// The batch unit: burned-in PE weight memories and the control counter that
// sequences their reads, wrapped around the stream unit. This is the
// externally visible cycle-steppable layer model.
class MvuUnit {
public:
    MvuUnit(const LayerConfig& cfg, const WeightMatrix& weights, const MvuOptions& opts = {});

    void drive(StreamChannel& in, StreamChannel& out);
    // One clock: fetches the weight word at the current address for every PE
    // bank, runs the stream unit, and advances/wraps the schedule counter
    // when the compute step fired.
    void commit(StreamChannel& in, StreamChannel& out);

    // Post-reset state: FSM Idle, pointers and counters zeroed, FIFO and
    // pipeline empty, trace cleared. Weight memory contents are retained.
    void reset();

    const LayerConfig& config() const { return cfg_; }
    const MvuOptions& options() const { return opts_; }
    const CycleTrace& trace() const { return stream_.trace(); }

    FsmState fsm_state() const { return stream_.fsm_state(); }
    int64_t schedule_cycle() const { return position_; }
    uint64_t cycle_index() const { return stream_.cycle_index(); }
    const FsmInputs& last_fsm_inputs() const { return stream_.last_fsm_inputs(); }
    int64_t fifo_occupancy() const { return stream_.fifo_occupancy(); }
    int64_t pipeline_occupancy() const { return stream_.pipeline_occupancy(); }
    int64_t buffer_written() const { return stream_.buffer_written(); }
    bool drained() const { return stream_.drained(); }

    const FoldedWeightMemory& weight_memory() const { return memory_; }

    void set_trace_observer(std::function<void(const TraceRecord&)> observer) {
        stream_.set_trace_observer(std::move(observer));
    }

private:
    LayerConfig cfg_;
    MvuOptions opts_;
    FoldedWeightMemory memory_;
    MvuStreamUnit stream_;
    int64_t position_ = 0;  // 0 .. SF*NF-1, wraps per input vector
    std::vector<BitWord> fetched_;  // per-PE words for the current address
};

// Cycle-level stimulus patterns for availability (source) and readiness
// (sink). Random patterns are Bernoulli per cycle from a seeded PRNG.
struct FlowPattern {
    enum class Kind { Always, Random, Never };
    Kind kind = Kind::Always;
    double density = 1.0;
    uint64_t seed = 0;

    static FlowPattern always() { return {Kind::Always, 1.0, 0}; }
    static FlowPattern never() { return {Kind::Never, 0.0, 0}; }
    static FlowPattern random(double density, uint64_t seed) {
        return {Kind::Random, density, seed};
    }
};

class PatternSampler {
public:
    explicit PatternSampler(const FlowPattern& pattern)
        : pattern_(pattern), rng_(pattern.seed), dist_(pattern.density) {}

    bool sample() {
        switch (pattern_.kind) {
            case FlowPattern::Kind::Always: return true;
            case FlowPattern::Kind::Never: return false;
            case FlowPattern::Kind::Random: return dist_(rng_);
        }
        return true;
    }

private:
    FlowPattern pattern_;
    std::mt19937_64 rng_;
    std::bernoulli_distribution dist_;
};

// AXI-legal stream master: once a beat is offered, tvalid stays asserted with
// stable tdata until it transfers; the pattern only gates when the next beat
// becomes available.
class StreamSource {
public:
    StreamSource(std::vector<BitWord> beats, const FlowPattern& pattern);

    void drive(StreamChannel& ch);
    void commit(const StreamChannel& ch);

    bool exhausted() const { return next_ == beats_.size() && !offering_; }
    uint64_t accepted() const { return static_cast<uint64_t>(next_); }
    const std::vector<uint64_t>& accept_cycles() const { return accept_cycles_; }

private:
    std::vector<BitWord> beats_;
    PatternSampler sampler_;
    size_t next_ = 0;
    bool offering_ = false;
    uint64_t cycle_ = 0;
    std::vector<uint64_t> accept_cycles_;
};

// Stream slave applying the readiness pattern and recording every word it
// accepts together with its cycle.
class StreamSink {
public:
    explicit StreamSink(const FlowPattern& pattern) : sampler_(pattern) {}

    void drive(StreamChannel& ch);
    void commit(const StreamChannel& ch);

    const std::vector<BitWord>& received() const { return received_; }
    const std::vector<uint64_t>& receive_cycles() const { return receive_cycles_; }

private:
    PatternSampler sampler_;
    uint64_t cycle_ = 0;
    std::vector<BitWord> received_;
    std::vector<uint64_t> receive_cycles_;
};

struct RunOptions {
    MvuOptions unit;
    FlowPattern in_pattern = FlowPattern::always();
    FlowPattern out_pattern = FlowPattern::always();
    uint64_t max_cycles = 0;  // 0: derived generous bound
    std::function<void(const TraceRecord&)> observer;
};

struct RunResult {
    bool completed = false;
    OutputMatrix outputs;  // one row per streamed vector, O_c columns
    CycleTrace trace;
    uint64_t first_input_cycle = 0;
    uint64_t last_output_cycle = 0;
    // last_output_cycle - first_input_cycle + 1; 0 when nothing transferred.
    uint64_t latency_cycles = 0;
    std::vector<uint64_t> input_accept_cycles;
    std::vector<uint64_t> output_cycles;
};

// Streams every column of `image` through a fresh unit and collects the
// outputs. With unconstrained patterns the outputs equal
// gemm_output(weights, image, cfg.datapath()) bit-exactly and consecutive
// vectors start exactly SF*NF cycles apart.
RunResult run_layer(const LayerConfig& cfg, const WeightMatrix& weights, const ImageMatrix& image,
                    const RunOptions& options = {});

}  // namespace mvusim
