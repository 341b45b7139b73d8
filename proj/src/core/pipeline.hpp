#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <vector>

#include "core/stream.hpp"

namespace mvusim {

// Reduces a producer element to the bit pattern a consumer datapath reads as
// an activation: the low bit for xnor, two's-complement truncation to
// input_bits otherwise. Applied wherever a wide accumulator output feeds the
// next layer's narrower input.
int64_t requantize(int64_t value, const DatapathKind& consumer);

// Two-deep decoupling queue between pipeline components. Its ready/valid
// outputs depend only on start-of-cycle occupancy, so chained components
// never form a same-cycle ready loop.
class SkidBuffer {
public:
    explicit SkidBuffer(int data_bits, int depth = 2) : data_bits_(data_bits), depth_(depth) {}

    void drive(StreamChannel& up, StreamChannel& down);
    void commit(const StreamChannel& up, const StreamChannel& down);
    void reset() { queue_.clear(); }

    int data_bits() const { return data_bits_; }

private:
    int data_bits_;
    int depth_;
    std::deque<BitWord> queue_;
};

// Repacks a producer's in_lanes-wide words into a consumer's out_lanes-wide
// words. Elements are truncated to element_bits on ingestion and forwarded in
// order and without loss: in_lanes * beats_in == out_lanes * beats_out over
// any whole number of vectors.
class WidthAdapter {
public:
    WidthAdapter(int in_lanes, int out_lanes, int element_bits, int in_element_bits);

    void drive(StreamChannel& in, StreamChannel& out);
    void commit(const StreamChannel& in, const StreamChannel& out);
    void reset() { staged_.clear(); }

    int in_lanes() const { return in_lanes_; }
    int out_lanes() const { return out_lanes_; }
    int element_bits() const { return element_bits_; }

private:
    int in_lanes_;
    int out_lanes_;
    int element_bits_;
    int in_element_bits_;
    size_t capacity_;  // staged elements; two vectors' worth keeps full rate
    std::deque<int64_t> staged_;
};

struct PipelineRunResult {
    bool completed = false;
    // One row per streamed input vector, O_c of the last layer columns.
    OutputMatrix outputs;
    std::vector<CycleTrace> layer_traces;
    // Per layer: cycle of first accepted input beat and last produced word.
    std::vector<std::optional<uint64_t>> layer_first_input;
    std::vector<std::optional<uint64_t>> layer_last_output;
    uint64_t end_to_end_cycles = 0;
    std::vector<uint64_t> input_accept_cycles;   // layer-0 beat acceptances
    std::vector<uint64_t> output_cycles;         // sink word arrivals
    uint64_t total_cycles = 0;
};

// An ordered chain of MVU layers connected by skid-buffered channels, with
// width adapters wherever a producer's PE count or element width differs
// from its consumer's SIMD geometry.
class Pipeline {
public:
    // Validates adjacency: layer i+1 must consume vectors of exactly O_c(i)
    // elements, which restricts chained layers to the fully connected
    // encoding (kernel_dim = ifm_dim = 1). Throws IncompatibleLayers.
    static Pipeline compose(const std::vector<LayerConfig>& configs,
                            const std::vector<WeightMatrix>& weights,
                            const MvuOptions& options = {});

    size_t layer_count() const { return units_.size(); }
    const LayerConfig& layer_config(size_t i) const { return units_[i]->config(); }

    // Streams the given vectors (each matrix_rows(0) elements long) through
    // the chain. With unconstrained patterns the steady-state initiation
    // interval per vector equals max_i SF_i * NF_i.
    PipelineRunResult run(const std::vector<std::vector<int64_t>>& input_vectors,
                          const FlowPattern& in_pattern = FlowPattern::always(),
                          const FlowPattern& out_pattern = FlowPattern::always(),
                          uint64_t max_cycles = 0);

    void reset();

private:
    Pipeline() = default;

    MvuOptions options_;
    std::vector<std::unique_ptr<MvuUnit>> units_;
    std::vector<std::unique_ptr<SkidBuffer>> skids_;     // after each unit but the last
    std::vector<std::unique_ptr<WidthAdapter>> adapters_;  // nullable per junction
};

}  // namespace mvusim
