#include "core/memory.hpp"

#include "core/errors.hpp"

namespace mvusim {

FoldedWeightMemory fold_weights(const WeightMatrix& weights, const LayerConfig& cfg) {
    if (weights.rows != cfg.shape().ofm_channels || weights.cols != cfg.shape().matrix_rows()) {
        throw ValidationError(ErrorCode::ShapeMismatch,
                              "weight matrix does not match layer shape");
    }
    const int pe = cfg.fold().pe;
    const int simd = cfg.fold().simd;
    const int bw = cfg.datapath().weight_storage_bits();
    const int64_t sf = cfg.synapse_fold();
    const int64_t nf = cfg.neuron_fold();

    const bool binary = cfg.datapath().type != DatapathType::Standard;
    const int64_t bound = binary ? 0 : int64_t{1} << (bw - 1);
    for (const int64_t e : weights.data) {
        const bool ok = binary ? (e == 0 || e == 1) : (e >= -bound && e < bound);
        if (!ok) {
            throw ValidationError(ErrorCode::PrecisionOutOfRange,
                                  "weight element outside the datapath's storage range");
        }
    }

    FoldedWeightMemory mem(pe, cfg.weight_mem_depth(), static_cast<int>(cfg.weight_word_bits()));
    for (int p = 0; p < pe; ++p) {
        for (int64_t t = 0; t < nf; ++t) {
            const int64_t row = t * pe + p;
            for (int64_t s = 0; s < sf; ++s) {
                BitWord& word = mem.word(p, t * sf + s);
                for (int lane = 0; lane < simd; ++lane) {
                    word.set_lane(lane, bw, weights.at(row, s * simd + lane));
                }
            }
        }
    }
    return mem;
}

WeightMatrix unfold_weights(const FoldedWeightMemory& memory, const LayerConfig& cfg) {
    const int pe = cfg.fold().pe;
    const int simd = cfg.fold().simd;
    const int bw = cfg.datapath().weight_storage_bits();
    const int64_t sf = cfg.synapse_fold();
    const int64_t nf = cfg.neuron_fold();
    if (memory.banks() != pe || memory.depth() != cfg.weight_mem_depth() ||
        memory.word_bits() != cfg.weight_word_bits()) {
        throw InternalError(ErrorCode::LayoutCorrupt,
                            "folded memory geometry does not match the config");
    }

    const bool binary = cfg.datapath().type != DatapathType::Standard;
    WeightMatrix out(cfg.shape().ofm_channels, cfg.shape().matrix_rows());
    for (int p = 0; p < pe; ++p) {
        for (int64_t t = 0; t < nf; ++t) {
            const int64_t row = t * pe + p;
            for (int64_t s = 0; s < sf; ++s) {
                const BitWord& word = memory.word(p, t * sf + s);
                for (int lane = 0; lane < simd; ++lane) {
                    out.at(row, s * simd + lane) =
                        binary ? static_cast<int64_t>(word.lane_unsigned(lane, bw))
                               : word.lane_signed(lane, bw);
                }
            }
        }
    }
    return out;
}

SchedulePoint schedule(const LayerConfig& cfg, int64_t cycle) {
    const int64_t sf = cfg.synapse_fold();
    const int64_t total = cfg.weight_mem_depth();
    if (cycle < 0 || cycle >= total) {
        throw Error(ErrorCode::OutOfRange, "schedule cycle outside 0..SF*NF-1");
    }
    SchedulePoint point;
    point.tile = cycle / sf;
    point.phase = cycle % sf;
    point.mem_address = cycle;
    point.buffer_index = point.phase;
    point.first_of_tile = point.phase == 0;
    point.last_of_tile = point.phase == sf - 1;
    return point;
}

}  // namespace mvusim
