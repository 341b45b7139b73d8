#include <random>

#include "doctest.h"

#include "core/bitword.hpp"

using mvusim::BitWord;

TEST_CASE("fields round-trip across 64-bit word boundaries") {
    BitWord w(200);
    w.set_field(60, 10, 0x2a7);  // spans words_[0] and words_[1]
    CHECK(w.get_field(60, 10) == 0x2a7);
    w.set_field(120, 17, 0x1abcd);
    CHECK(w.get_field(120, 17) == 0x1abcd);
    w.set_field(0, 1, 1);
    CHECK(w.get_field(0, 1) == 1);
    CHECK(w.get_field(60, 10) == 0x2a7);
}

TEST_CASE("signed lanes sign-extend") {
    BitWord w(32);
    w.set_lane(1, 4, -3);
    CHECK(w.lane_signed(1, 4) == -3);
    CHECK(w.lane_unsigned(1, 4) == 0xd);
    w.set_lane(2, 4, 7);
    CHECK(w.lane_signed(2, 4) == 7);
}

TEST_CASE("random lane round-trip at several widths") {
    std::mt19937_64 rng(7);
    for (int width : {1, 3, 8, 13, 31, 63}) {
        const int lanes = 5;
        BitWord w(width * lanes);
        std::vector<int64_t> values(lanes);
        for (int i = 0; i < lanes; ++i) {
            const int64_t bound = width == 63 ? (int64_t{1} << 62) : (int64_t{1} << (width - 1));
            values[i] = static_cast<int64_t>(rng() % (2 * static_cast<uint64_t>(bound))) - bound;
            values[i] = BitWord::truncate_signed(values[i], width);
            w.set_lane(i, width, values[i]);
        }
        for (int i = 0; i < lanes; ++i) {
            CAPTURE(width);
            CHECK(w.lane_signed(i, width) == values[i]);
        }
    }
}

TEST_CASE("xnor popcount equals per-lane agreement count") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const int lanes = 1 + static_cast<int>(rng() % 130);
        BitWord a(lanes), b(lanes);
        int agree = 0;
        for (int i = 0; i < lanes; ++i) {
            const int ai = static_cast<int>(rng() & 1);
            const int bi = static_cast<int>(rng() & 1);
            a.set_lane(i, 1, ai);
            b.set_lane(i, 1, bi);
            agree += ai == bi;
        }
        CHECK(a.xnor_popcount(b, lanes) == agree);
    }
}

TEST_CASE("byte serialization round-trips and is little-lane-first") {
    BitWord w(12);
    w.set_lane(0, 4, 0x1);
    w.set_lane(1, 4, 0x2);
    w.set_lane(2, 4, 0x3);
    const auto bytes = w.to_bytes();
    REQUIRE(bytes.size() == 2);
    CHECK(bytes[0] == 0x21);  // lane 0 in the low nibble
    CHECK(bytes[1] == 0x03);
    CHECK(BitWord::from_bytes(bytes.data(), 12) == w);

    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const int bits = 1 + static_cast<int>(rng() % 190);
        BitWord v(bits);
        for (int i = 0; i < bits; ++i) v.set_field(i, 1, rng() & 1);
        const auto serialized = v.to_bytes();
        CHECK(BitWord::from_bytes(serialized.data(), bits) == v);
    }
}

TEST_CASE("truncate_signed wraps into two's complement") {
    CHECK(BitWord::truncate_signed(5, 4) == 5);
    CHECK(BitWord::truncate_signed(8, 4) == -8);
    CHECK(BitWord::truncate_signed(-1, 4) == -1);
    CHECK(BitWord::truncate_signed(16, 4) == 0);
    CHECK(BitWord::truncate_signed(1, 1) == -1);
    CHECK(BitWord::truncate_signed(0, 1) == 0);
}
