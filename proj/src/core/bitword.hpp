#pragma once

#include <cstdint>
#include <vector>

namespace mvusim {

// A fixed-width bit vector modelling one TDATA word. Bit 0 is the least
// significant bit of the word; lane i of width w occupies bits
// [i*w, (i+1)*w). Packing is therefore little-lane-first, which is also the
// byte order used by the binary file formats.
class BitWord {
public:
    BitWord() = default;
    explicit BitWord(int bits);

    int bits() const { return bits_; }
    bool empty() const { return bits_ == 0; }

    void clear();

    // Raw bit-field access. width must be 1..63; signed reads sign-extend
    // from the field's top bit.
    void set_field(int offset, int width, uint64_t value);
    uint64_t get_field(int offset, int width) const;
    int64_t get_field_signed(int offset, int width) const;

    // Lane access for words holding `lanes` fields of `lane_bits` each.
    void set_lane(int lane, int lane_bits, int64_t value);
    int64_t lane_signed(int lane, int lane_bits) const;
    uint64_t lane_unsigned(int lane, int lane_bits) const;

    // Number of set bits in bits [0, lanes) after XNOR with `other`.
    // Both words must have the same width.
    int xnor_popcount(const BitWord& other, int lanes) const;

    bool operator==(const BitWord& other) const = default;

    const std::vector<uint64_t>& raw() const { return words_; }

    // Serialization to/from little-endian bytes, ceil(bits/8) long.
    std::vector<uint8_t> to_bytes() const;
    static BitWord from_bytes(const uint8_t* data, int bits);

    // Truncate value to `width` bits and reinterpret as signed two's
    // complement. width must be 1..63.
    static int64_t truncate_signed(int64_t value, int width);

private:
    int bits_ = 0;
    std::vector<uint64_t> words_;
};

}  // namespace mvusim
