#pragma once

#include <cstdint>
#include <string>

namespace mvusim {

// Static description of one layer lowered to a matrix-vector product.
// Kernels and feature maps are square; convolutions are stride 1 with no
// padding, so ofm_dim = ifm_dim - kernel_dim + 1. A fully connected layer is
// expressed as kernel_dim = ifm_dim = ofm_dim = 1.
struct LayerShape {
    int kernel_dim = 1;    // K_d
    int ifm_channels = 1;  // I_c
    int ifm_dim = 1;       // I_d
    int ofm_channels = 1;  // O_c
    int ofm_dim = 1;       // O_d

    // Lowered weight-matrix column count / image-matrix row count.
    int64_t matrix_rows() const {
        return static_cast<int64_t>(kernel_dim) * kernel_dim * ifm_channels;
    }
    // Output pixels per image, one streamed vector each.
    int64_t matrix_cols() const { return static_cast<int64_t>(ofm_dim) * ofm_dim; }

    static LayerShape fully_connected(int in_features, int out_features) {
        return LayerShape{1, in_features, 1, out_features, 1};
    }
};

struct FoldConfig {
    int pe = 1;    // parallel processing elements (rows handled concurrently)
    int simd = 1;  // input lanes per PE (columns handled concurrently)
};

enum class DatapathType {
    Xnor,          // 1-bit inputs and weights, XNOR + popcount
    BinaryWeight,  // 1-bit weights as a +/- multiplexer, multi-bit inputs
    Standard,      // signed multiplier, arbitrary precision
};

struct DatapathKind {
    DatapathType type = DatapathType::Standard;
    int input_bits = 1;
    int weight_bits = 1;

    static DatapathKind xnor() { return {DatapathType::Xnor, 1, 1}; }
    static DatapathKind binary_weight(int input_bits) {
        return {DatapathType::BinaryWeight, input_bits, 1};
    }
    static DatapathKind standard(int input_bits, int weight_bits) {
        return {DatapathType::Standard, input_bits, weight_bits};
    }

    // Stored weight width B_w: one bit for the two binary kinds.
    int weight_storage_bits() const { return type == DatapathType::Standard ? weight_bits : 1; }
    int activation_bits() const { return type == DatapathType::Xnor ? 1 : input_bits; }

    bool operator==(const DatapathKind&) const = default;
};

const char* datapath_type_name(DatapathType type);

// A fully validated layer description. Construction is only possible through
// validate(), after which every derived quantity below is well defined.
// Instances are immutable and freely shareable.
class LayerConfig {
public:
    // Checks all shape/fold/precision invariants. Throws ValidationError
    // (NonDivisiblePe, NonDivisibleSimd, ShapeMismatch, ZeroDimension,
    // PrecisionOutOfRange, AccumulatorTooWide) on the first violation.
    static LayerConfig validate(const LayerShape& shape, const FoldConfig& fold,
                                const DatapathKind& datapath);

    const LayerShape& shape() const { return shape_; }
    const FoldConfig& fold() const { return fold_; }
    const DatapathKind& datapath() const { return datapath_; }

    // SF = K_d^2 * I_c / S: cycles to stream one input vector.
    int64_t synapse_fold() const { return shape_.matrix_rows() / fold_.simd; }
    // NF = O_c / P: weight-matrix row tiles per input vector.
    int64_t neuron_fold() const { return shape_.ofm_channels / fold_.pe; }
    // Weight memory depth per PE bank; equals SF * NF.
    int64_t weight_mem_depth() const { return synapse_fold() * neuron_fold(); }
    // Input buffer depth in SIMD-wide words; equals SF.
    int64_t input_buffer_depth() const { return synapse_fold(); }
    // Stored word width of one weight-memory entry: SIMD * B_w.
    int64_t weight_word_bits() const {
        return static_cast<int64_t>(fold_.simd) * datapath_.weight_storage_bits();
    }

    // Width of one input-stream beat: SIMD activations.
    int64_t input_word_bits() const {
        return static_cast<int64_t>(fold_.simd) * datapath_.activation_bits();
    }
    // Accumulator width that provably cannot overflow for this layer.
    int accumulator_bits() const { return accumulator_bits_; }
    // Width of one output-stream word: PE accumulators.
    int64_t output_word_bits() const { return static_cast<int64_t>(fold_.pe) * accumulator_bits_; }
    // Total bits held across all PE weight banks.
    int64_t total_weight_bits() const {
        return weight_mem_depth() * weight_word_bits() * fold_.pe;
    }
    // Total bits held by the input buffer.
    int64_t input_buffer_bits() const { return input_buffer_depth() * input_word_bits(); }

    std::string describe() const;

    bool operator==(const LayerConfig&) const = default;

private:
    LayerConfig(const LayerShape& shape, const FoldConfig& fold, const DatapathKind& datapath,
                int accumulator_bits)
        : shape_(shape), fold_(fold), datapath_(datapath), accumulator_bits_(accumulator_bits) {}

    LayerShape shape_;
    FoldConfig fold_;
    DatapathKind datapath_;
    int accumulator_bits_;
};

bool operator==(const LayerShape& a, const LayerShape& b);
bool operator==(const FoldConfig& a, const FoldConfig& b);

}  // namespace mvusim
