#include "core/datapath.hpp"

#include <vector>

#include "core/errors.hpp"

namespace mvusim {

int64_t xnor_lane_sum(const BitWord& activations, const BitWord& weights, int lanes) {
    return 2 * static_cast<int64_t>(activations.xnor_popcount(weights, lanes)) - lanes;
}

int64_t binary_weight_lane(int64_t activation, int weight_bit) {
    return weight_bit ? activation : -activation;
}

int64_t standard_lane(int64_t activation, int64_t weight) {
    return activation * weight;
}

namespace {

int64_t reduce(std::span<const int64_t> v, size_t lo, size_t width) {
    // width is a power of two; slots past v.size() contribute the zero pad.
    if (width == 1) return lo < v.size() ? v[lo] : 0;
    const size_t half = width / 2;
    return reduce(v, lo, half) + reduce(v, lo + half, half);
}

}  // namespace

int64_t adder_tree(std::span<const int64_t> partials) {
    if (partials.empty()) return 0;
    size_t width = 1;
    while (width < partials.size()) width *= 2;
    return reduce(partials, 0, width);
}

int64_t simd_partial(const DatapathKind& kind, const BitWord& activations, const BitWord& weights,
                     int lanes) {
    switch (kind.type) {
        case DatapathType::Xnor:
            return xnor_lane_sum(activations, weights, lanes);
        case DatapathType::BinaryWeight: {
            std::vector<int64_t> products(lanes);
            for (int i = 0; i < lanes; ++i) {
                products[i] =
                    binary_weight_lane(activations.lane_signed(i, kind.input_bits),
                                       static_cast<int>(weights.lane_unsigned(i, 1)));
            }
            return adder_tree(products);
        }
        case DatapathType::Standard: {
            std::vector<int64_t> products(lanes);
            for (int i = 0; i < lanes; ++i) {
                products[i] = standard_lane(activations.lane_signed(i, kind.input_bits),
                                            weights.lane_signed(i, kind.weight_bits));
            }
            return adder_tree(products);
        }
    }
    return 0;
}

Accumulator pe_cycle(const Accumulator& state, const BitWord& activations, const BitWord& weights,
                     const DatapathKind& kind, int lanes, bool first_of_tile) {
    const int64_t partial = simd_partial(kind, activations, weights, lanes);
    Accumulator next = state;
    next.value = first_of_tile ? partial : state.value + partial;
    const int64_t bound = int64_t{1} << (state.width_bits - 1);
    if (next.value >= bound || next.value <= -bound) {
        throw InternalError(ErrorCode::AccumulatorOverflow,
                            "accumulator exceeded its stated width");
    }
    return next;
}

}  // namespace mvusim
