#pragma once

#include <cstdint>
#include <vector>

#include "core/bitword.hpp"
#include "core/config.hpp"

namespace mvusim {

// 3-D activation tensor, indexed (channel, y, x), row-major within a channel.
struct Tensor3 {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<int64_t> data;

    Tensor3() = default;
    Tensor3(int c, int h, int w) : channels(c), height(h), width(w), data(size_t(c) * h * w, 0) {}

    int64_t& at(int c, int y, int x) { return data[(size_t(c) * height + y) * width + x]; }
    int64_t at(int c, int y, int x) const { return data[(size_t(c) * height + y) * width + x]; }
    size_t size() const { return data.size(); }
};

// Lowered image matrix: rows = K_d^2 * I_c, one column per output pixel.
// Storage is column-major so a column is one streamed input vector.
struct ImageMatrix {
    int64_t rows = 0;
    int64_t cols = 0;
    std::vector<int64_t> data;  // data[col * rows + row]

    ImageMatrix() = default;
    ImageMatrix(int64_t r, int64_t c) : rows(r), cols(c), data(size_t(r) * c, 0) {}

    int64_t& at(int64_t row, int64_t col) { return data[size_t(col) * rows + row]; }
    int64_t at(int64_t row, int64_t col) const { return data[size_t(col) * rows + row]; }
};

// Weight matrix: O_c rows by K_d^2 * I_c columns, row-major. For the two
// binary kinds elements are stored as bits {0,1} encoding {-1,+1}.
struct WeightMatrix {
    int64_t rows = 0;
    int64_t cols = 0;
    std::vector<int64_t> data;  // data[row * cols + col]

    WeightMatrix() = default;
    WeightMatrix(int64_t r, int64_t c) : rows(r), cols(c), data(size_t(r) * c, 0) {}

    int64_t& at(int64_t row, int64_t col) { return data[size_t(row) * cols + col]; }
    int64_t at(int64_t row, int64_t col) const { return data[size_t(row) * cols + col]; }
};

// Generic row-major integer matrix used for simulator outputs
// (output pixels as rows, O_c columns).
struct OutputMatrix {
    int64_t rows = 0;
    int64_t cols = 0;
    std::vector<int64_t> data;

    OutputMatrix() = default;
    OutputMatrix(int64_t r, int64_t c) : rows(r), cols(c), data(size_t(r) * c, 0) {}

    int64_t& at(int64_t row, int64_t col) { return data[size_t(row) * cols + col]; }
    int64_t at(int64_t row, int64_t col) const { return data[size_t(row) * cols + col]; }

    bool operator==(const OutputMatrix&) const = default;
};

// Expands the sliding windows of `input` into an image matrix. Row order is
// channel-major, then kernel row, then kernel column:
//   row = c * K_d^2 + ky * K_d + kx
// Column j corresponds to output pixel (j / O_d, j % O_d).
ImageMatrix im2col(const Tensor3& input, const LayerShape& shape);

// Dense product with the datapath's lane semantics: entry (j, r) is the dot
// product of weight row r and image column j. Serves as the functional
// reference for the streamed unit.
OutputMatrix gemm_output(const WeightMatrix& weights, const ImageMatrix& image,
                         const DatapathKind& datapath);

// Splits each image-matrix column into SF beats of `simd` lanes, packed
// little-lane-first at the activation width. Beat s of column j carries rows
// s*S .. s*S+S-1.
std::vector<BitWord> pack_input_stream(const ImageMatrix& image, const FoldConfig& fold,
                                       const DatapathKind& datapath);

// Inverse of pack_input_stream; used by round-trip checks and the pipeline
// test harness.
ImageMatrix unpack_input_stream(const std::vector<BitWord>& beats, int64_t rows,
                                const FoldConfig& fold, const DatapathKind& datapath);

}  // namespace mvusim
