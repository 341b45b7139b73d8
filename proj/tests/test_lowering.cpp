#include <random>

#include "doctest.h"

#include "core/errors.hpp"
#include "core/lowering.hpp"
#include "core/oracle.hpp"
#include "support/test_support.hpp"

using namespace mvusim;

namespace {

// Test-local window extractor: walks every output pixel and kernel offset
// directly, with no layout cleverness shared with im2col.
int64_t naive_window_value(const Tensor3& in, int kd, int od, int64_t row, int64_t col) {
    const int64_t c = row / (kd * kd);
    const int64_t ky = (row / kd) % kd;
    const int64_t kx = row % kd;
    const int64_t oy = col / od;
    const int64_t ox = col % od;
    return in.at(static_cast<int>(c), static_cast<int>(oy + ky), static_cast<int>(ox + kx));
}

}  // namespace

TEST_CASE("im2col of a full-size window is one flattened column") {
    Tensor3 in(1, 2, 2);
    in.at(0, 0, 0) = 1;
    in.at(0, 0, 1) = 2;
    in.at(0, 1, 0) = 3;
    in.at(0, 1, 1) = 4;
    const ImageMatrix m = im2col(in, {2, 1, 2, 1, 1});
    REQUIRE(m.rows == 4);
    REQUIRE(m.cols == 1);
    CHECK(m.at(0, 0) == 1);
    CHECK(m.at(1, 0) == 2);
    CHECK(m.at(2, 0) == 3);
    CHECK(m.at(3, 0) == 4);
}

TEST_CASE("im2col columns match the naive window extractor") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const int id = 2 + static_cast<int>(rng() % 5);
        const int kd = 1 + static_cast<int>(rng() % std::min(3, id));
        const int ic = 1 + static_cast<int>(rng() % 4);
        const int od = id - kd + 1;
        Tensor3 in(ic, id, id);
        for (auto& e : in.data) e = static_cast<int64_t>(rng() % 17) - 8;
        const ImageMatrix m = im2col(in, {kd, ic, id, 1, od});
        REQUIRE(m.rows == int64_t(kd) * kd * ic);
        REQUIRE(m.cols == int64_t(od) * od);
        for (int64_t r = 0; r < m.rows; ++r) {
            for (int64_t c = 0; c < m.cols; ++c) {
                CHECK(m.at(r, c) == naive_window_value(in, kd, od, r, c));
            }
        }
    }
}

TEST_CASE("im2col rows are channel-major blocks") {
    Tensor3 in(2, 3, 3);
    for (size_t i = 0; i < in.data.size(); ++i) in.data[i] = static_cast<int64_t>(i);
    const ImageMatrix m = im2col(in, {2, 2, 3, 1, 2});
    REQUIRE(m.rows == 8);
    // rows 0-3 come from channel 0, rows 4-7 from channel 1
    CHECK(m.at(0, 0) == in.at(0, 0, 0));
    CHECK(m.at(4, 0) == in.at(1, 0, 0));
    CHECK(m.at(7, 3) == in.at(1, 2, 2));
}

TEST_CASE("im2col rejects tensors that do not match the shape") {
    Tensor3 in(1, 2, 2);
    CHECK_THROWS_AS(im2col(in, {2, 2, 2, 1, 1}), ValidationError);
    CHECK_THROWS_AS(im2col(in, {2, 1, 3, 1, 2}), ValidationError);
}

TEST_CASE("gemm_output identity case") {
    WeightMatrix w(1, 1);
    w.at(0, 0) = 1;
    ImageMatrix x(1, 1);
    x.at(0, 0) = 5;
    const OutputMatrix y = gemm_output(w, x, DatapathKind::standard(4, 4));
    CHECK(y.at(0, 0) == 5);
}

TEST_CASE("gemm_output equals a brute-force matrix-vector product") {
    std::mt19937_64 rng(5);
    WeightMatrix w(4, 4);
    for (auto& e : w.data) e = static_cast<int64_t>(rng() % 15) - 7;
    ImageMatrix x(4, 1);
    for (auto& e : x.data) e = static_cast<int64_t>(rng() % 15) - 7;
    const OutputMatrix y = gemm_output(w, x, DatapathKind::standard(4, 4));
    for (int64_t r = 0; r < 4; ++r) {
        int64_t expect = 0;
        for (int64_t k = 0; k < 4; ++k) expect += w.at(r, k) * x.at(k, 0);
        CHECK(y.at(0, r) == expect);
    }
}

TEST_CASE("gemm_output xnor semantics count lane agreement") {
    WeightMatrix w(2, 2);
    w.data = {1, 1, 1, 1};
    ImageMatrix x(2, 2);
    x.data = {1, 1, 1, 1};
    const OutputMatrix y = gemm_output(w, x, DatapathKind::xnor());
    for (int64_t j = 0; j < 2; ++j) {
        for (int64_t r = 0; r < 2; ++r) CHECK(y.at(j, r) == 2);
    }
}

TEST_CASE("gemm_output rejects mismatched shapes") {
    CHECK_THROWS_AS(gemm_output(WeightMatrix(2, 3), ImageMatrix(4, 1),
                                DatapathKind::standard(4, 4)),
                    ValidationError);
}

TEST_CASE("standard gemm path equals direct convolution") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        const int id = 2 + static_cast<int>(rng() % 5);
        const int kd = 1 + static_cast<int>(rng() % std::min(3, id));
        const int ic = 1 + static_cast<int>(rng() % 4);
        const int oc = 1 + static_cast<int>(rng() % 4);
        const int od = id - kd + 1;

        Tensor3 in(ic, id, id);
        for (auto& e : in.data) e = static_cast<int64_t>(rng() % 15) - 7;
        oracle::KernelStack kernels(oc, ic, kd);
        for (auto& e : kernels.data) e = static_cast<int64_t>(rng() % 15) - 7;

        const Tensor3 direct = oracle::reference_conv(in, kernels);
        const OutputMatrix lowered =
            gemm_output(oracle::kernels_to_weight_matrix(kernels),
                        im2col(in, {kd, ic, id, oc, od}), DatapathKind::standard(4, 4));
        for (int c = 0; c < oc; ++c) {
            for (int oy = 0; oy < od; ++oy) {
                for (int ox = 0; ox < od; ++ox) {
                    CHECK(direct.at(c, oy, ox) == lowered.at(int64_t(oy) * od + ox, c));
                }
            }
        }
    }
}

TEST_CASE("pack_input_stream groups lanes little-lane-first") {
    ImageMatrix x(4, 1);
    x.data = {3, -2, 1, -4};
    const auto beats = pack_input_stream(x, {1, 2}, DatapathKind::standard(4, 4));
    REQUIRE(beats.size() == 2);
    CHECK(beats[0].lane_signed(0, 4) == 3);
    CHECK(beats[0].lane_signed(1, 4) == -2);
    CHECK(beats[1].lane_signed(0, 4) == 1);
    CHECK(beats[1].lane_signed(1, 4) == -4);
    // lane 0 sits in the least significant bits of the word
    CHECK(beats[0].get_field(0, 4) == 3);
}

TEST_CASE("fully parallel packing is one beat per column") {
    ImageMatrix x(4, 3);
    for (size_t i = 0; i < x.data.size(); ++i) x.data[i] = static_cast<int64_t>(i % 5) - 2;
    const auto beats = pack_input_stream(x, {1, 4}, DatapathKind::standard(4, 4));
    CHECK(beats.size() == 3);
}

TEST_CASE("pack/unpack round-trips random matrices") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 60; ++trial) {
        const testsupport::ConfigLimits lim;
        const LayerConfig cfg = testsupport::random_config(rng, lim);
        ImageMatrix x(cfg.shape().matrix_rows(), 1 + static_cast<int64_t>(rng() % 4));
        for (auto& e : x.data) {
            if (cfg.datapath().type == DatapathType::Xnor) {
                e = static_cast<int64_t>(rng() & 1);
            } else {
                const int64_t bound = int64_t{1} << (cfg.datapath().input_bits - 1);
                e = static_cast<int64_t>(rng() % (2 * static_cast<uint64_t>(bound))) - bound;
            }
        }
        const auto beats = pack_input_stream(x, cfg.fold(), cfg.datapath());
        const ImageMatrix back =
            unpack_input_stream(beats, x.rows, cfg.fold(), cfg.datapath());
        CHECK(back.data == x.data);
    }
}

TEST_CASE("pack_input_stream rejects out-of-range activations and bad folds") {
    ImageMatrix x(4, 1);
    x.data = {3, -2, 1, 9};  // 9 does not fit 4 signed bits
    CHECK_THROWS_AS(pack_input_stream(x, {1, 2}, DatapathKind::standard(4, 4)), ValidationError);
    ImageMatrix y(4, 1);
    CHECK_THROWS_AS(pack_input_stream(y, {1, 3}, DatapathKind::standard(4, 4)), ValidationError);
}
