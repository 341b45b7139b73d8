#include <random>

#include "doctest.h"

#include "core/errors.hpp"
#include "core/pipeline.hpp"
#include "core/report.hpp"
#include "core/weightio.hpp"
#include "support/test_support.hpp"

using namespace mvusim;

namespace {

LayerConfig fc(int in, int out, int pe, int simd, DatapathKind kind = DatapathKind::standard(4, 4)) {
    return LayerConfig::validate(LayerShape::fully_connected(in, out), {pe, simd}, kind);
}

std::vector<std::vector<int64_t>> random_vectors(const LayerConfig& cfg, int64_t count,
                                                 std::mt19937_64& rng) {
    const ImageMatrix image = random_image_matrix(cfg, count, rng);
    std::vector<std::vector<int64_t>> out(static_cast<size_t>(count));
    for (int64_t j = 0; j < count; ++j) {
        out[static_cast<size_t>(j)].resize(static_cast<size_t>(image.rows));
        for (int64_t r = 0; r < image.rows; ++r) {
            out[static_cast<size_t>(j)][static_cast<size_t>(r)] = image.at(r, j);
        }
    }
    return out;
}

}  // namespace

TEST_CASE("requantize truncates to the consumer's activation format") {
    CHECK(requantize(5, DatapathKind::xnor()) == 1);
    CHECK(requantize(-2, DatapathKind::xnor()) == 0);
    CHECK(requantize(9, DatapathKind::standard(4, 4)) == -7);
    CHECK(requantize(-9, DatapathKind::standard(4, 4)) == 7);
    CHECK(requantize(3, DatapathKind::binary_weight(4)) == 3);
}

TEST_CASE("width adapter repacks losslessly across lane counts") {
    std::mt19937_64 rng(211);
    for (auto [in_lanes, out_lanes, total] :
         {std::tuple{4, 2, 8}, std::tuple{2, 4, 8}, std::tuple{8, 2, 16}, std::tuple{3, 4, 12}}) {
        WidthAdapter adapter(in_lanes, out_lanes, 4, 9);
        StreamChannel in(in_lanes * 9), out(out_lanes * 4);
        std::vector<int64_t> sent, received;
        int fed = 0;
        int guard = 0;
        while (static_cast<int>(received.size()) < total && guard++ < 200) {
            in.begin_cycle();
            out.begin_cycle();
            adapter.drive(in, out);
            if (fed < total && in.tready) {
                BitWord word(in_lanes * 9);
                for (int l = 0; l < in_lanes && fed < total; ++l, ++fed) {
                    const int64_t v = static_cast<int64_t>(rng() % 16) - 8;
                    word.set_lane(l, 9, v);
                    sent.push_back(BitWord::truncate_signed(v, 4));
                }
                in.tvalid = true;
                in.tdata = word;
            }
            out.tready = true;
            if (out.fired()) {
                for (int l = 0; l < out_lanes; ++l) received.push_back(out.tdata.lane_signed(l, 4));
            }
            adapter.commit(in, out);
        }
        CHECK(received == sent);
    }
}

TEST_CASE("compose validates adjacency") {
    std::mt19937_64 rng(223);
    const std::vector<LayerConfig> good = {fc(6, 4, 2, 3), fc(4, 4, 2, 2), fc(4, 2, 1, 4)};
    std::vector<WeightMatrix> weights;
    for (const auto& cfg : good) weights.push_back(random_weight_matrix(cfg, rng));
    CHECK_NOTHROW(Pipeline::compose(good, weights));

    const std::vector<LayerConfig> bad = {fc(6, 4, 2, 3), fc(8, 4, 2, 2)};
    std::vector<WeightMatrix> bad_weights;
    for (const auto& cfg : bad) bad_weights.push_back(random_weight_matrix(cfg, rng));
    CHECK_THROWS_WITH_AS(Pipeline::compose(bad, bad_weights),
                         doctest::Contains("IncompatibleLayers"), ValidationError);
}

TEST_CASE("the intrusion-detection chain composes with matched widths") {
    std::mt19937_64 rng(227);
    const std::vector<LayerConfig> configs = nid_layer_configs();
    std::vector<WeightMatrix> weights;
    for (const auto& cfg : configs) weights.push_back(random_weight_matrix(cfg, rng));
    Pipeline p = Pipeline::compose(configs, weights);
    CHECK(p.layer_count() == 4);
}

TEST_CASE("a single-layer pipeline behaves like run_layer") {
    std::mt19937_64 rng(229);
    const LayerConfig cfg = fc(8, 4, 2, 2);
    const WeightMatrix w = random_weight_matrix(cfg, rng);
    Pipeline p = Pipeline::compose({cfg}, {w});
    const auto vectors = random_vectors(cfg, 3, rng);
    const PipelineRunResult run = p.run(vectors);
    REQUIRE(run.completed);

    ImageMatrix image(cfg.shape().matrix_rows(), 3);
    for (int64_t j = 0; j < 3; ++j) {
        for (int64_t r = 0; r < image.rows; ++r) {
            image.at(r, j) = vectors[static_cast<size_t>(j)][static_cast<size_t>(r)];
        }
    }
    const RunResult direct = run_layer(cfg, w, image, {});
    CHECK(run.outputs == direct.outputs);
}

TEST_CASE("two identity-like layers equal their chained oracles") {
    std::mt19937_64 rng(233);
    const LayerConfig a = fc(1, 1, 1, 1);
    const LayerConfig b = fc(1, 1, 1, 1);
    WeightMatrix wa(1, 1), wb(1, 1);
    wa.at(0, 0) = 1;
    wb.at(0, 0) = 2;
    Pipeline p = Pipeline::compose({a, b}, {wa, wb});
    const std::vector<std::vector<int64_t>> inputs = {{3}, {-4}, {5}};
    const PipelineRunResult run = p.run(inputs);
    REQUIRE(run.completed);
    const auto expect = testsupport::chained_oracle({a, b}, {wa, wb}, inputs);
    for (size_t j = 0; j < inputs.size(); ++j) {
        CHECK(run.outputs.at(static_cast<int64_t>(j), 0) == expect[j][0]);
    }
}

TEST_CASE("random pipelines match the chained oracle under sink backpressure") {
    std::mt19937_64 rng(239);
    for (int trial = 0; trial < 25; ++trial) {
        const int layers = 2 + static_cast<int>(rng() % 3);
        std::vector<LayerConfig> configs;
        std::vector<WeightMatrix> weights;
        int in_features = 2 + static_cast<int>(rng() % 8);
        for (int i = 0; i < layers; ++i) {
            const int out_features = 1 + static_cast<int>(rng() % 8);
            const DatapathKind kind = testsupport::random_kind(rng, 4);
            const int pe = testsupport::random_divisor(rng, out_features);
            const int simd = testsupport::random_divisor(rng, in_features);
            configs.push_back(fc(in_features, out_features, pe, simd, kind));
            weights.push_back(random_weight_matrix(configs.back(), rng));
            in_features = out_features;
        }
        Pipeline p = Pipeline::compose(configs, weights);
        const auto inputs = random_vectors(configs.front(), 1 + rng() % 4, rng);
        const FlowPattern sink = (trial % 2 == 0)
                                     ? FlowPattern::always()
                                     : FlowPattern::random(0.4, rng());
        const PipelineRunResult run = p.run(inputs, FlowPattern::always(), sink, 1u << 20);
        CAPTURE(trial);
        REQUIRE(run.completed);
        const auto expect = testsupport::chained_oracle(configs, weights, inputs);
        for (size_t j = 0; j < inputs.size(); ++j) {
            for (int64_t c = 0; c < run.outputs.cols; ++c) {
                CHECK(run.outputs.at(static_cast<int64_t>(j), c) ==
                      expect[j][static_cast<size_t>(c)]);
            }
        }
    }
}

TEST_CASE("matched lane counts and widths connect with a bare skid junction") {
    // Producer: 2 PEs with 4-bit accumulators (1-bit inputs, 2-bit weights,
    // one lane). Consumer: 2 SIMD lanes of 4-bit inputs. Word formats line
    // up exactly, so no width adapter is inserted and no truncation happens.
    const LayerConfig a = fc(1, 2, 2, 1, DatapathKind::standard(1, 2));
    REQUIRE(a.accumulator_bits() == 4);
    const LayerConfig b = fc(2, 1, 1, 2, DatapathKind::standard(4, 4));

    std::mt19937_64 rng(251);
    WeightMatrix wa(2, 1);
    wa.data = {-2, 1};
    WeightMatrix wb(1, 2);
    wb.data = {3, -4};
    Pipeline p = Pipeline::compose({a, b}, {wa, wb});
    const std::vector<std::vector<int64_t>> inputs = {{-1}, {0}};
    const PipelineRunResult run = p.run(inputs);
    REQUIRE(run.completed);
    const auto expect = testsupport::chained_oracle({a, b}, {wa, wb}, inputs);
    for (size_t j = 0; j < inputs.size(); ++j) {
        CHECK(run.outputs.at(static_cast<int64_t>(j), 0) == expect[j][0]);
    }
}

TEST_CASE("pipeline throughput is bounded by the slowest layer's fold product") {
    std::mt19937_64 rng(241);
    const std::vector<LayerConfig> configs = nid_layer_configs();
    std::vector<WeightMatrix> weights;
    for (const auto& cfg : configs) weights.push_back(random_weight_matrix(cfg, rng));
    Pipeline p = Pipeline::compose(configs, weights);

    const int64_t inferences = 30;
    const auto inputs = random_vectors(configs.front(), inferences, rng);
    const PipelineRunResult run = p.run(inputs);
    REQUIRE(run.completed);

    int64_t max_fold = 0;
    for (const auto& cfg : configs) max_fold = std::max(max_fold, cfg.weight_mem_depth());
    REQUIRE(max_fold == 12);

    const size_t sf0 = static_cast<size_t>(configs[0].synapse_fold());
    for (int64_t v = 1; v < inferences; ++v) {
        const uint64_t delta = run.input_accept_cycles[static_cast<size_t>(v) * sf0] -
                               run.input_accept_cycles[static_cast<size_t>(v - 1) * sf0];
        CHECK(delta == static_cast<uint64_t>(max_fold));
    }
}
