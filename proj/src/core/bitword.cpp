#include "core/bitword.hpp"

#include <bit>
#include <cassert>

#include "core/errors.hpp"

namespace mvusim {

namespace {

uint64_t low_mask(int width) {
    return width >= 64 ? ~uint64_t{0} : (uint64_t{1} << width) - 1;
}

}  // namespace

BitWord::BitWord(int bits) : bits_(bits), words_((bits + 63) / 64, 0) {
    if (bits < 0) throw InternalError(ErrorCode::InternalInvariant, "negative BitWord width");
}

void BitWord::clear() {
    for (auto& w : words_) w = 0;
}

void BitWord::set_field(int offset, int width, uint64_t value) {
    assert(width >= 1 && width <= 63);
    if (offset < 0 || offset + width > bits_)
        throw InternalError(ErrorCode::OutOfRange, "BitWord field out of range");
    value &= low_mask(width);
    const int word = offset / 64;
    const int shift = offset % 64;
    words_[word] = (words_[word] & ~(low_mask(width) << shift)) | (value << shift);
    const int spill = shift + width - 64;
    if (spill > 0) {
        words_[word + 1] = (words_[word + 1] & ~low_mask(spill)) | (value >> (width - spill));
    }
}

uint64_t BitWord::get_field(int offset, int width) const {
    assert(width >= 1 && width <= 63);
    if (offset < 0 || offset + width > bits_)
        throw InternalError(ErrorCode::OutOfRange, "BitWord field out of range");
    const int word = offset / 64;
    const int shift = offset % 64;
    uint64_t value = words_[word] >> shift;
    const int spill = shift + width - 64;
    if (spill > 0) {
        value |= words_[word + 1] << (width - spill);
    }
    return value & low_mask(width);
}

int64_t BitWord::get_field_signed(int offset, int width) const {
    return truncate_signed(static_cast<int64_t>(get_field(offset, width)), width);
}

void BitWord::set_lane(int lane, int lane_bits, int64_t value) {
    set_field(lane * lane_bits, lane_bits, static_cast<uint64_t>(value));
}

int64_t BitWord::lane_signed(int lane, int lane_bits) const {
    return get_field_signed(lane * lane_bits, lane_bits);
}

uint64_t BitWord::lane_unsigned(int lane, int lane_bits) const {
    return get_field(lane * lane_bits, lane_bits);
}

int BitWord::xnor_popcount(const BitWord& other, int lanes) const {
    if (other.bits_ != bits_ || lanes > bits_)
        throw InternalError(ErrorCode::ShapeMismatch, "xnor_popcount width mismatch");
    int count = 0;
    int remaining = lanes;
    for (size_t i = 0; i < words_.size() && remaining > 0; ++i) {
        uint64_t x = ~(words_[i] ^ other.words_[i]);
        if (remaining < 64) x &= low_mask(remaining);
        count += std::popcount(x);
        remaining -= 64;
    }
    return count;
}

std::vector<uint8_t> BitWord::to_bytes() const {
    std::vector<uint8_t> out((bits_ + 7) / 8, 0);
    for (size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<uint8_t>(words_[i / 8] >> (8 * (i % 8)));
    }
    if (bits_ % 8 != 0) out.back() &= static_cast<uint8_t>(low_mask(bits_ % 8));
    return out;
}

BitWord BitWord::from_bytes(const uint8_t* data, int bits) {
    BitWord w(bits);
    const int nbytes = (bits + 7) / 8;
    for (int i = 0; i < nbytes; ++i) {
        w.words_[i / 8] |= static_cast<uint64_t>(data[i]) << (8 * (i % 8));
    }
    if (bits % 64 != 0) w.words_.back() &= low_mask(bits % 64);
    return w;
}

int64_t BitWord::truncate_signed(int64_t value, int width) {
    assert(width >= 1 && width <= 63);
    uint64_t v = static_cast<uint64_t>(value) & low_mask(width);
    if (v & (uint64_t{1} << (width - 1))) {
        v |= ~low_mask(width);
    }
    return static_cast<int64_t>(v);
}

}  // namespace mvusim
