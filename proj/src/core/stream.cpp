#include "core/stream.hpp"

#include "core/errors.hpp"

namespace mvusim {

const char* fsm_state_name(FsmState state) {
    switch (state) {
        case FsmState::Idle: return "Idle";
        case FsmState::Write: return "Write";
        case FsmState::Read: return "Read";
    }
    return "?";
}

FsmState fsm_step(FsmState state, bool tvalid, bool tready, bool inp_buf_full, bool comp_done) {
    switch (state) {
        case FsmState::Idle:
            if (tready && inp_buf_full) return FsmState::Read;
            if (tvalid && tready) return FsmState::Write;
            return FsmState::Idle;
        case FsmState::Write:
            if (!tvalid || !tready) return FsmState::Idle;
            if (tready && inp_buf_full) return FsmState::Read;
            return FsmState::Write;
        case FsmState::Read:
            if (tvalid && comp_done) return FsmState::Write;
            if (!tready || comp_done) return FsmState::Idle;
            return FsmState::Read;
    }
    return FsmState::Idle;
}

MvuStreamUnit::MvuStreamUnit(const LayerConfig& cfg, const MvuOptions& opts)
    : cfg_(cfg),
      opts_(opts),
      buffer_(cfg.input_buffer_depth(), static_cast<int>(cfg.input_word_bits())),
      accumulators_(static_cast<size_t>(cfg.fold().pe),
                    Accumulator{0, cfg.accumulator_bits()}),
      pipeline_(static_cast<size_t>(opts.pipeline_depth - 1)) {
    if (opts.fifo_depth < 1 || opts.pipeline_depth < 1) {
        throw ValidationError(ErrorCode::ZeroDimension,
                              "fifo_depth and pipeline_depth must be >= 1");
    }
}

int64_t MvuStreamUnit::pipeline_occupancy() const {
    int64_t n = 0;
    for (const auto& stage : pipeline_) n += stage.has_value() ? 1 : 0;
    return n;
}

// Whether the result path can absorb one more word this cycle: every stage
// advances into a slot freed further down, with the FIFO (after this cycle's
// pop) at the far end.
bool MvuStreamUnit::entry_free_after_shift(bool out_fire) const {
    bool next_moves = static_cast<int64_t>(fifo_.size()) - (out_fire ? 1 : 0) <
                      static_cast<int64_t>(opts_.fifo_depth);
    for (auto it = pipeline_.rbegin(); it != pipeline_.rend(); ++it) {
        next_moves = !it->has_value() || next_moves;
    }
    return next_moves;
}

void MvuStreamUnit::shift_pipeline(bool out_fire) {
    if (out_fire) {
        fifo_.pop_front();
        ++trace_.beats_out;
    }
    bool next_free = static_cast<int64_t>(fifo_.size()) < static_cast<int64_t>(opts_.fifo_depth);
    for (size_t i = pipeline_.size(); i-- > 0;) {
        if (pipeline_[i].has_value() && next_free) {
            if (i + 1 == pipeline_.size()) {
                fifo_.push_back(std::move(*pipeline_[i]));
            } else {
                pipeline_[i + 1] = std::move(pipeline_[i]);
            }
            pipeline_[i].reset();
            next_free = true;
        } else {
            next_free = !pipeline_[i].has_value();
        }
    }
}

void MvuStreamUnit::push_result() {
    BitWord word(static_cast<int>(cfg_.output_word_bits()));
    const int acc_bits = cfg_.accumulator_bits();
    for (int p = 0; p < cfg_.fold().pe; ++p) {
        word.set_lane(p, acc_bits, accumulators_[static_cast<size_t>(p)].value);
    }
    if (pipeline_.empty()) {
        if (static_cast<int64_t>(fifo_.size()) >= opts_.fifo_depth) {
            throw InternalError(ErrorCode::FifoOverflow, "output FIFO overflow");
        }
        fifo_.push_back(std::move(word));
    } else {
        if (pipeline_.front().has_value()) {
            throw InternalError(ErrorCode::FifoOverflow, "result pipeline entry occupied");
        }
        pipeline_.front() = std::move(word);
    }
}

MvuStreamUnit::CycleDecision MvuStreamUnit::resolve(const StreamChannel& in,
                                                    const StreamChannel& out,
                                                    const SchedulePoint& point) const {
    CycleDecision d;
    d.write_phase = point.tile == 0;
    d.out_fire = !fifo_.empty() && out.tready;
    // A cycle that completes a tile must be able to hand the word to the
    // result path; other compute cycles are not gated by it.
    d.can_compute = !point.last_of_tile || entry_free_after_shift(d.out_fire);
    if (d.write_phase) {
        d.do_write = in.tvalid && d.can_compute;
        d.do_compute = d.do_write;
    } else {
        d.do_write = false;
        d.do_compute = d.can_compute;
    }
    d.comp_done = d.do_compute && point.tile == cfg_.neuron_fold() - 1 && point.last_of_tile;
    const int64_t written_after = buffer_.written() + (d.do_write ? 1 : 0);
    d.inp_buf_full = written_after == cfg_.input_buffer_depth() && !d.comp_done;
    return d;
}

void MvuStreamUnit::drive(StreamChannel& in, StreamChannel& out,
                          const SchedulePoint& point) const {
    out.tvalid = !fifo_.empty();
    if (out.tvalid) out.tdata = fifo_.front();
    // Ready whenever the current vector still wants beats and an eventual
    // tile completion this cycle has somewhere to go.
    in.tready = point.tile == 0 &&
                (!point.last_of_tile || entry_free_after_shift(!fifo_.empty() && out.tready));
}

bool MvuStreamUnit::commit(StreamChannel& in, StreamChannel& out, const SchedulePoint& point,
                           std::span<const BitWord> weight_words) {
    const CycleDecision d = resolve(in, out, point);

    shift_pipeline(d.out_fire);

    if (d.do_write) {
        buffer_.write(in.tdata);
        ++trace_.beats_in;
    }
    if (d.do_compute) {
        const BitWord& activations = d.write_phase ? in.tdata : buffer_.read(point.buffer_index);
        for (int p = 0; p < cfg_.fold().pe; ++p) {
            accumulators_[static_cast<size_t>(p)] =
                pe_cycle(accumulators_[static_cast<size_t>(p)], activations,
                         weight_words[static_cast<size_t>(p)], cfg_.datapath(),
                         cfg_.fold().simd, point.first_of_tile);
        }
        if (point.last_of_tile) push_result();
        ++trace_.compute_cycles;
        if (d.comp_done) buffer_.release();
    } else if (d.write_phase && !in.tvalid) {
        ++trace_.stall_cycles_starvation;
    } else {
        ++trace_.stall_cycles_backpressure;
    }

    if (observer_) {
        TraceRecord rec;
        rec.cycle = cycle_;
        rec.state = fsm_;
        rec.in_tvalid = in.tvalid;
        rec.in_tready = in.tready;
        rec.out_tvalid = out.tvalid;
        rec.out_tready = out.tready;
        rec.tile = point.tile;
        rec.phase = point.phase;
        rec.compute_fired = d.do_compute;
        rec.beat_in = d.do_write;
        rec.beat_out = d.out_fire;
        observer_(rec);
    }

    ++trace_.state_cycles[static_cast<int>(fsm_)];
    ++trace_.total_cycles;
    last_fsm_inputs_ = {in.tvalid, d.can_compute, d.inp_buf_full, d.comp_done};
    fsm_ = fsm_step(fsm_, in.tvalid, d.can_compute, d.inp_buf_full, d.comp_done);
    ++cycle_;
    return d.do_compute;
}

void MvuStreamUnit::reset() {
    buffer_.reset();
    for (auto& acc : accumulators_) acc.value = 0;
    for (auto& stage : pipeline_) stage.reset();
    fifo_.clear();
    fsm_ = FsmState::Idle;
    last_fsm_inputs_ = {};
    trace_ = {};
    cycle_ = 0;
}

MvuUnit::MvuUnit(const LayerConfig& cfg, const WeightMatrix& weights, const MvuOptions& opts)
    : cfg_(cfg),
      opts_(opts),
      memory_(fold_weights(weights, cfg)),
      stream_(cfg, opts),
      fetched_(static_cast<size_t>(cfg.fold().pe)) {}

void MvuUnit::drive(StreamChannel& in, StreamChannel& out) {
    stream_.drive(in, out, schedule(cfg_, position_));
}

void MvuUnit::commit(StreamChannel& in, StreamChannel& out) {
    const SchedulePoint point = schedule(cfg_, position_);
    for (int p = 0; p < cfg_.fold().pe; ++p) {
        fetched_[static_cast<size_t>(p)] = memory_.word(p, point.mem_address);
    }
    if (stream_.commit(in, out, point, fetched_)) {
        position_ = (position_ + 1) % cfg_.weight_mem_depth();
    }
}

void MvuUnit::reset() {
    stream_.reset();
    position_ = 0;
}

StreamSource::StreamSource(std::vector<BitWord> beats, const FlowPattern& pattern)
    : beats_(std::move(beats)), sampler_(pattern) {}

void StreamSource::drive(StreamChannel& ch) {
    if (!offering_ && next_ < beats_.size() && sampler_.sample()) {
        offering_ = true;
    }
    if (offering_) {
        ch.tvalid = true;
        ch.tdata = beats_[next_];
    }
}

void StreamSource::commit(const StreamChannel& ch) {
    if (offering_ && ch.fired()) {
        accept_cycles_.push_back(cycle_);
        ++next_;
        offering_ = false;
    }
    ++cycle_;
}

void StreamSink::drive(StreamChannel& ch) {
    ch.tready = sampler_.sample();
}

void StreamSink::commit(const StreamChannel& ch) {
    if (ch.fired()) {
        received_.push_back(ch.tdata);
        receive_cycles_.push_back(cycle_);
    }
    ++cycle_;
}

RunResult run_layer(const LayerConfig& cfg, const WeightMatrix& weights, const ImageMatrix& image,
                    const RunOptions& options) {
    if (image.rows != cfg.shape().matrix_rows()) {
        throw ValidationError(ErrorCode::ShapeMismatch, "image rows do not match layer shape");
    }

    MvuUnit unit(cfg, weights, options.unit);
    if (options.observer) unit.set_trace_observer(options.observer);

    StreamSource source(pack_input_stream(image, cfg.fold(), cfg.datapath()),
                        options.in_pattern);
    StreamSink sink(options.out_pattern);
    StreamChannel in(static_cast<int>(cfg.input_word_bits()));
    StreamChannel out(static_cast<int>(cfg.output_word_bits()));

    const uint64_t expected_words =
        static_cast<uint64_t>(image.cols) * static_cast<uint64_t>(cfg.neuron_fold());
    uint64_t max_cycles = options.max_cycles;
    if (max_cycles == 0) {
        // Generous default: worst-case schedule plus slack; random patterns
        // with low density scale it further via the caller.
        max_cycles = 64 + 8 * static_cast<uint64_t>(image.cols) *
                              static_cast<uint64_t>(cfg.weight_mem_depth()) +
                     static_cast<uint64_t>(options.unit.pipeline_depth) * 8;
    }

    uint64_t cycle = 0;
    while (sink.received().size() < expected_words && cycle < max_cycles) {
        in.begin_cycle();
        out.begin_cycle();
        source.drive(in);
        sink.drive(out);
        unit.drive(in, out);
        unit.commit(in, out);
        source.commit(in);
        sink.commit(out);
        ++cycle;
    }

    RunResult result;
    result.completed = sink.received().size() == expected_words;
    result.trace = unit.trace();
    result.input_accept_cycles = source.accept_cycles();
    result.output_cycles = sink.receive_cycles();
    if (!result.input_accept_cycles.empty()) {
        result.first_input_cycle = result.input_accept_cycles.front();
    }
    if (!result.output_cycles.empty()) {
        result.last_output_cycle = result.output_cycles.back();
        result.latency_cycles = result.last_output_cycle - result.first_input_cycle + 1;
    }

    // Unpack received words: word k belongs to vector k / NF, tile k % NF.
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

}  // namespace mvusim
