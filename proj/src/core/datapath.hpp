#pragma once

#include <cstdint>
#include <span>

#include "core/bitword.hpp"
#include "core/config.hpp"

namespace mvusim {

// Running dot-product state of one PE. width_bits is the analytic bound from
// LayerConfig::accumulator_bits(); pe_cycle traps if a value ever escapes it.
struct Accumulator {
    int64_t value = 0;
    int width_bits = 63;
};

// +/-1-semantics dot product of two packed bit vectors:
// 2 * popcount(xnor(a, w)) - lanes, where bit b encodes the value 2b - 1.
// The popcount runs across the whole packed word; per-lane evaluation is
// arithmetically identical.
int64_t xnor_lane_sum(const BitWord& activations, const BitWord& weights, int lanes);

// Multiplexer lane for 1-bit weights: weight bit 1 passes the activation
// through, weight bit 0 negates it.
int64_t binary_weight_lane(int64_t activation, int weight_bit);

// Full-precision signed multiplier lane.
int64_t standard_lane(int64_t activation, int64_t weight);

// Balanced binary tree reduction, zero-padded to the next power of two.
// Integer addition is associative, so this equals the sequential sum.
int64_t adder_tree(std::span<const int64_t> partials);

// One-cycle S-lane partial product for the given datapath kind. Activations
// are packed at activation_bits, weights at weight_storage_bits.
int64_t simd_partial(const DatapathKind& kind, const BitWord& activations, const BitWord& weights,
                     int lanes);

// One PE clock: compute the S-lane partial and either load (first cycle of an
// output tile) or accumulate it. Throws AccumulatorOverflow if the stated
// width is violated; unreachable for configs that pass validation.
Accumulator pe_cycle(const Accumulator& state, const BitWord& activations, const BitWord& weights,
                     const DatapathKind& kind, int lanes, bool first_of_tile);

}  // namespace mvusim
