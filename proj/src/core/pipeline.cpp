#include "core/pipeline.hpp"

#include <algorithm>

#include "core/errors.hpp"

namespace mvusim {

int64_t requantize(int64_t value, const DatapathKind& consumer) {
    if (consumer.type == DatapathType::Xnor) return value & 1;
    return BitWord::truncate_signed(value, consumer.input_bits);
}

void SkidBuffer::drive(StreamChannel& up, StreamChannel& down) {
    up.tready = static_cast<int>(queue_.size()) < depth_;
    down.tvalid = !queue_.empty();
    if (down.tvalid) down.tdata = queue_.front();
}

void SkidBuffer::commit(const StreamChannel& up, const StreamChannel& down) {
    if (down.fired()) queue_.pop_front();
    if (up.fired()) queue_.push_back(up.tdata);
}

WidthAdapter::WidthAdapter(int in_lanes, int out_lanes, int element_bits, int in_element_bits)
    : in_lanes_(in_lanes),
      out_lanes_(out_lanes),
      element_bits_(element_bits),
      in_element_bits_(in_element_bits),
      capacity_(2 * std::max<size_t>(static_cast<size_t>(in_lanes) + out_lanes,
                                     static_cast<size_t>(std::max(in_lanes, out_lanes)) * 2)) {}

void WidthAdapter::drive(StreamChannel& in, StreamChannel& out) {
    in.tready = staged_.size() + static_cast<size_t>(in_lanes_) <= capacity_;
    out.tvalid = staged_.size() >= static_cast<size_t>(out_lanes_);
    if (out.tvalid) {
        BitWord word(out_lanes_ * element_bits_);
        for (int lane = 0; lane < out_lanes_; ++lane) {
            word.set_lane(lane, element_bits_, staged_[static_cast<size_t>(lane)]);
        }
        out.tdata = word;
    }
}

void WidthAdapter::commit(const StreamChannel& in, const StreamChannel& out) {
    if (out.fired()) {
        staged_.erase(staged_.begin(), staged_.begin() + out_lanes_);
    }
    if (in.fired()) {
        for (int lane = 0; lane < in_lanes_; ++lane) {
            const int64_t raw = in.tdata.lane_signed(lane, in_element_bits_);
            staged_.push_back(BitWord::truncate_signed(raw, element_bits_));
        }
    }
}

Pipeline Pipeline::compose(const std::vector<LayerConfig>& configs,
                           const std::vector<WeightMatrix>& weights,
                           const MvuOptions& options) {
    if (configs.empty() || configs.size() != weights.size()) {
        throw ValidationError(ErrorCode::IncompatibleLayers,
                              "need one weight matrix per layer and at least one layer");
    }
    for (size_t i = 0; i + 1 < configs.size(); ++i) {
        const auto& producer = configs[i];
        const auto& consumer = configs[i + 1];
        if (consumer.shape().matrix_rows() != producer.shape().ofm_channels) {
            throw ValidationError(ErrorCode::IncompatibleLayers,
                                  "layer " + std::to_string(i + 1) + " expects vectors of " +
                                      std::to_string(consumer.shape().matrix_rows()) +
                                      " elements but layer " + std::to_string(i) + " produces " +
                                      std::to_string(producer.shape().ofm_channels));
        }
        if (consumer.shape().kernel_dim != 1 || consumer.shape().ifm_dim != 1) {
            throw ValidationError(ErrorCode::IncompatibleLayers,
                                  "chained layers must use the fully connected encoding");
        }
    }

    Pipeline p;
    p.options_ = options;
    for (size_t i = 0; i < configs.size(); ++i) {
        p.units_.push_back(std::make_unique<MvuUnit>(configs[i], weights[i], options));
    }
    for (size_t i = 0; i + 1 < configs.size(); ++i) {
        const auto& producer = configs[i];
        const auto& consumer = configs[i + 1];
        const bool need_adapter =
            producer.fold().pe != consumer.fold().simd ||
            producer.accumulator_bits() != consumer.datapath().activation_bits();
        const int skid_bits = static_cast<int>(producer.output_word_bits());
        p.skids_.push_back(std::make_unique<SkidBuffer>(skid_bits));
        if (need_adapter) {
            p.adapters_.push_back(std::make_unique<WidthAdapter>(
                producer.fold().pe, consumer.fold().simd,
                consumer.datapath().activation_bits(), producer.accumulator_bits()));
        } else {
            p.adapters_.push_back(nullptr);
        }
    }
    return p;
}

void Pipeline::reset() {
    for (auto& u : units_) u->reset();
    for (auto& s : skids_) s->reset();
    for (auto& a : adapters_) {
        if (a) a->reset();
    }
}

PipelineRunResult Pipeline::run(const std::vector<std::vector<int64_t>>& input_vectors,
                                const FlowPattern& in_pattern, const FlowPattern& out_pattern,
                                uint64_t max_cycles) {
    const size_t n = units_.size();
    const LayerConfig& first = units_.front()->config();
    const LayerConfig& last = units_.back()->config();

    ImageMatrix image(first.shape().matrix_rows(), static_cast<int64_t>(input_vectors.size()));
    for (size_t j = 0; j < input_vectors.size(); ++j) {
        if (static_cast<int64_t>(input_vectors[j].size()) != image.rows) {
            throw ValidationError(ErrorCode::ShapeMismatch,
                                  "input vector length does not match the first layer");
        }
        for (int64_t r = 0; r < image.rows; ++r) {
            image.at(r, static_cast<int64_t>(j)) = input_vectors[j][static_cast<size_t>(r)];
        }
    }

    StreamSource source(pack_input_stream(image, first.fold(), first.datapath()), in_pattern);
    StreamSink sink(out_pattern);

    std::vector<StreamChannel> in_ch;
    std::vector<StreamChannel> out_ch;
    std::vector<StreamChannel> mid_ch;  // between skid and adapter, per junction
    for (size_t i = 0; i < n; ++i) {
        in_ch.emplace_back(static_cast<int>(units_[i]->config().input_word_bits()));
        out_ch.emplace_back(static_cast<int>(units_[i]->config().output_word_bits()));
    }
    for (size_t i = 0; i + 1 < n; ++i) {
        mid_ch.emplace_back(static_cast<int>(units_[i]->config().output_word_bits()));
    }

    int64_t max_depth = 1;
    for (const auto& u : units_) max_depth = std::max(max_depth, u->config().weight_mem_depth());
    const uint64_t expected_words =
        static_cast<uint64_t>(input_vectors.size()) * static_cast<uint64_t>(last.neuron_fold());
    if (max_cycles == 0) {
        max_cycles = 512 + 16 * static_cast<uint64_t>(n) *
                               static_cast<uint64_t>(input_vectors.size() + 4) *
                               static_cast<uint64_t>(max_depth);
    }

    PipelineRunResult result;
    result.layer_traces.resize(n);
    result.layer_first_input.resize(n);
    result.layer_last_output.resize(n);

    uint64_t cycle = 0;
    while (sink.received().size() < expected_words && cycle < max_cycles) {
        for (auto& ch : in_ch) ch.begin_cycle();
        for (auto& ch : out_ch) ch.begin_cycle();
        for (auto& ch : mid_ch) ch.begin_cycle();

        // Phase 1: everything whose outputs depend only on start-of-cycle
        // state. Unit drives follow because they sample their channel ends.
        source.drive(in_ch[0]);
        sink.drive(out_ch[n - 1]);
        for (size_t i = 0; i + 1 < n; ++i) {
            if (adapters_[i]) {
                skids_[i]->drive(out_ch[i], mid_ch[i]);
                adapters_[i]->drive(mid_ch[i], in_ch[i + 1]);
            } else {
                skids_[i]->drive(out_ch[i], in_ch[i + 1]);
            }
        }
        for (size_t i = 0; i < n; ++i) units_[i]->drive(in_ch[i], out_ch[i]);

        // Record per-layer activity while the wires are resolved.
        for (size_t i = 0; i < n; ++i) {
            if (in_ch[i].fired() && !result.layer_first_input[i]) {
                result.layer_first_input[i] = cycle;
            }
            if (out_ch[i].fired()) result.layer_last_output[i] = cycle;
        }

        // Phase 2: state commit.
        for (size_t i = 0; i < n; ++i) units_[i]->commit(in_ch[i], out_ch[i]);
        for (size_t i = 0; i + 1 < n; ++i) {
            if (adapters_[i]) {
                skids_[i]->commit(out_ch[i], mid_ch[i]);
                adapters_[i]->commit(mid_ch[i], in_ch[i + 1]);
            } else {
                skids_[i]->commit(out_ch[i], in_ch[i + 1]);
            }
        }
        source.commit(in_ch[0]);
        sink.commit(out_ch[n - 1]);
        ++cycle;
    }

    result.completed = sink.received().size() == expected_words;
    result.total_cycles = cycle;
    for (size_t i = 0; i < n; ++i) result.layer_traces[i] = units_[i]->trace();
    result.input_accept_cycles = source.accept_cycles();
    result.output_cycles = sink.receive_cycles();
    if (!result.output_cycles.empty() && !result.input_accept_cycles.empty()) {
        result.end_to_end_cycles =
            result.output_cycles.back() - result.input_accept_cycles.front() + 1;
    }

    const int64_t nf = last.neuron_fold();
    const int pe = last.fold().pe;
    const int acc_bits = last.accumulator_bits();
    result.outputs =
        OutputMatrix(static_cast<int64_t>(input_vectors.size()), last.shape().ofm_channels);
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
