#include "doctest.h"

#include "core/config.hpp"
#include "core/errors.hpp"

using namespace mvusim;

namespace {

LayerConfig make(int kd, int ic, int id, int oc, int od, int pe, int simd,
                 DatapathKind kind = DatapathKind::standard(4, 4)) {
    return LayerConfig::validate({kd, ic, id, oc, od}, {pe, simd}, kind);
}

}  // namespace

TEST_CASE("validate accepts the sweep base configuration") {
    const LayerConfig cfg = make(4, 64, 32, 64, 29, 2, 2);
    CHECK(cfg.shape().matrix_rows() == 16 * 64);
    CHECK(cfg.shape().matrix_cols() == 29 * 29);
}

TEST_CASE("validate accepts the intrusion-detection first layer") {
    const LayerConfig cfg = make(1, 600, 1, 64, 1, 64, 50, DatapathKind::standard(2, 2));
    CHECK(cfg.synapse_fold() == 12);
    CHECK(cfg.neuron_fold() == 1);
}

TEST_CASE("validate rejects bad folds and shapes with specific errors") {
    CHECK_THROWS_WITH_AS(make(4, 64, 32, 64, 29, 3, 2), doctest::Contains("NonDivisiblePe"),
                         ValidationError);
    CHECK_THROWS_WITH_AS(make(4, 64, 32, 64, 29, 2, 3), doctest::Contains("NonDivisibleSimd"),
                         ValidationError);
    CHECK_THROWS_WITH_AS(make(4, 64, 32, 64, 28, 2, 2), doctest::Contains("ShapeMismatch"),
                         ValidationError);
    CHECK_THROWS_WITH_AS(make(4, 64, 2, 64, 29, 2, 2), doctest::Contains("ShapeMismatch"),
                         ValidationError);
    CHECK_THROWS_WITH_AS(make(0, 64, 32, 64, 29, 2, 2), doctest::Contains("ZeroDimension"),
                         ValidationError);
    CHECK_THROWS_WITH_AS(make(4, 64, 32, 0, 29, 2, 2), doctest::Contains("ZeroDimension"),
                         ValidationError);
}

TEST_CASE("validate rejects inconsistent datapath precisions") {
    CHECK_THROWS_AS(make(2, 4, 4, 4, 3, 2, 2, DatapathKind{DatapathType::Xnor, 2, 1}),
                    ValidationError);
    CHECK_THROWS_AS(make(2, 4, 4, 4, 3, 2, 2, DatapathKind{DatapathType::BinaryWeight, 4, 2}),
                    ValidationError);
    CHECK_THROWS_AS(make(2, 4, 4, 4, 3, 2, 2, DatapathKind::standard(4, 1)), ValidationError);
    CHECK_THROWS_AS(make(2, 4, 4, 4, 3, 2, 2, DatapathKind::standard(64, 4)), ValidationError);
}

TEST_CASE("accumulators wider than 63 bits are rejected up front") {
    CHECK_THROWS_WITH_AS(make(1, 4, 1, 4, 1, 1, 1, DatapathKind::standard(32, 32)),
                         doctest::Contains("AccumulatorTooWide"), ValidationError);
}

TEST_CASE("synapse fold") {
    CHECK(make(4, 64, 32, 64, 29, 2, 32).synapse_fold() == 32);
    CHECK(make(1, 600, 1, 64, 1, 64, 50, DatapathKind::standard(2, 2)).synapse_fold() == 12);
    CHECK(make(2, 1, 2, 4, 1, 2, 4).synapse_fold() == 1);
}

TEST_CASE("neuron fold") {
    CHECK(make(1, 64, 1, 64, 1, 16, 32, DatapathKind::standard(2, 2)).neuron_fold() == 4);
    CHECK(make(1, 64, 1, 64, 1, 64, 64).neuron_fold() == 1);
    CHECK(make(1, 4, 1, 4, 1, 2, 2).neuron_fold() == 2);
}

TEST_CASE("weight memory depth follows the memory formula") {
    CHECK(make(4, 64, 32, 64, 29, 32, 32).weight_mem_depth() == 64);
    CHECK(make(2, 1, 2, 4, 1, 4, 4).weight_mem_depth() == 1);
    CHECK(make(1, 600, 1, 64, 1, 64, 50, DatapathKind::standard(2, 2)).weight_mem_depth() == 12);
}

TEST_CASE("input buffer depth") {
    CHECK(make(4, 64, 32, 64, 29, 2, 2).input_buffer_depth() == 512);
    CHECK(make(4, 2, 8, 64, 5, 2, 2).input_buffer_depth() == 16);
    CHECK(make(1, 64, 1, 64, 1, 64, 64).input_buffer_depth() == 1);
}

TEST_CASE("weight word bits scale with SIMD and weight precision") {
    CHECK(make(4, 64, 32, 64, 29, 2, 32).weight_word_bits() == 128);
    CHECK(make(4, 64, 32, 64, 29, 2, 2, DatapathKind::xnor()).weight_word_bits() == 2);
    CHECK(make(1, 600, 1, 64, 1, 64, 50, DatapathKind::standard(2, 2)).weight_word_bits() == 100);
}

TEST_CASE("weight memory depth equals the product of the folds on a dense grid") {
    for (int kd = 1; kd <= 3; ++kd) {
        for (int ic = 1; ic <= 6; ++ic) {
            for (int oc = 1; oc <= 6; ++oc) {
                const int64_t rows = int64_t(kd) * kd * ic;
                for (int simd = 1; simd <= rows; ++simd) {
                    if (rows % simd != 0) continue;
                    for (int pe = 1; pe <= oc; ++pe) {
                        if (oc % pe != 0) continue;
                        const LayerConfig cfg = make(kd, ic, kd + 1, oc, 2, pe, simd);
                        CHECK(cfg.weight_mem_depth() ==
                              cfg.synapse_fold() * cfg.neuron_fold());
                        CHECK(cfg.synapse_fold() >= 1);
                        CHECK(cfg.neuron_fold() >= 1);
                    }
                }
            }
        }
    }
}

TEST_CASE("fully parallel configurations have unit folds") {
    const LayerConfig cfg = make(2, 3, 4, 5, 3, 5, 12);
    CHECK(cfg.synapse_fold() == 1);
    CHECK(cfg.neuron_fold() == 1);
    CHECK(cfg.weight_mem_depth() == 1);
}
