#pragma once

#include <cstdint>
#include <vector>

#include "core/bitword.hpp"
#include "core/config.hpp"
#include "core/lowering.hpp"

namespace mvusim {

// Weight storage folded onto P banks of D_mem words, one bank per PE.
// Bank p, address t*SF + s holds weight-matrix row t*P + p, columns
// s*S .. s*S+S-1, packed at the storage width B_w. Contents are burned in at
// construction; there is no runtime write path.
class FoldedWeightMemory {
public:
    FoldedWeightMemory(int banks, int64_t depth, int word_bits)
        : banks_(banks),
          depth_(depth),
          word_bits_(word_bits),
          words_(size_t(banks) * depth, BitWord(word_bits)) {}

    int banks() const { return banks_; }
    int64_t depth() const { return depth_; }
    int word_bits() const { return word_bits_; }

    const BitWord& word(int bank, int64_t address) const {
        return words_[size_t(bank) * depth_ + address];
    }
    BitWord& word(int bank, int64_t address) { return words_[size_t(bank) * depth_ + address]; }

    int64_t total_bits() const { return int64_t(banks_) * depth_ * word_bits_; }

private:
    int banks_;
    int64_t depth_;
    int word_bits_;
    std::vector<BitWord> words_;
};

// Packs a weight matrix into PE banks per the layout above. The matrix must
// be O_c x K_d^2*I_c with elements in the datapath's storage range.
FoldedWeightMemory fold_weights(const WeightMatrix& weights, const LayerConfig& cfg);

// Exact inverse of fold_weights, for round-trip verification. Throws
// LayoutCorrupt if the memory geometry does not match the config.
WeightMatrix unfold_weights(const FoldedWeightMemory& memory, const LayerConfig& cfg);

// Position of one compute cycle in the tile-major schedule: all SF phases of
// output tile t complete before tile t+1 starts, so the weight address is a
// plain increment and the input buffer is re-read NF times per vector.
struct SchedulePoint {
    int64_t tile = 0;          // t = cycle / SF
    int64_t phase = 0;         // s = cycle % SF
    int64_t mem_address = 0;   // = cycle
    int64_t buffer_index = 0;  // = s
    bool first_of_tile = false;
    bool last_of_tile = false;
};

// Throws OutOfRange unless 0 <= cycle < SF*NF.
SchedulePoint schedule(const LayerConfig& cfg, int64_t cycle);

// SIMD-wide activation buffer of depth SF. One vector is written once and
// re-read for every subsequent output tile.
class InputBuffer {
public:
    explicit InputBuffer(int64_t depth, int word_bits)
        : depth_(depth), words_(size_t(depth), BitWord(word_bits)) {}

    int64_t depth() const { return depth_; }
    int64_t write_ptr() const { return write_ptr_; }
    int64_t read_ptr() const { return read_ptr_; }
    // True once all SF beats of the current vector have been written.
    bool full() const { return written_ == depth_; }
    int64_t written() const { return written_; }

    void write(const BitWord& word) {
        words_[size_t(write_ptr_)] = word;
        write_ptr_ = (write_ptr_ + 1) % depth_;
        ++written_;
    }

    const BitWord& read(int64_t index) {
        read_ptr_ = index;
        return words_[size_t(index)];
    }

    // Marks the buffered vector consumed so the next one can be written.
    void release() {
        written_ = 0;
        write_ptr_ = 0;
        read_ptr_ = 0;
    }

    void reset() {
        release();
        for (auto& w : words_) w.clear();
    }

private:
    int64_t depth_;
    std::vector<BitWord> words_;
    int64_t write_ptr_ = 0;
    int64_t read_ptr_ = 0;
    int64_t written_ = 0;
};

}  // namespace mvusim
