#include "core/lowering.hpp"

#include "core/datapath.hpp"
#include "core/errors.hpp"

namespace mvusim {

ImageMatrix im2col(const Tensor3& input, const LayerShape& shape) {
    if (input.channels != shape.ifm_channels || input.height != shape.ifm_dim ||
        input.width != shape.ifm_dim) {
        throw ValidationError(ErrorCode::ShapeMismatch, "input tensor does not match layer shape");
    }
    const int kd = shape.kernel_dim;
    const int od = shape.ofm_dim;
    ImageMatrix out(shape.matrix_rows(), shape.matrix_cols());
    for (int oy = 0; oy < od; ++oy) {
        for (int ox = 0; ox < od; ++ox) {
            const int64_t col = static_cast<int64_t>(oy) * od + ox;
            for (int c = 0; c < shape.ifm_channels; ++c) {
                for (int ky = 0; ky < kd; ++ky) {
                    for (int kx = 0; kx < kd; ++kx) {
                        const int64_t row = (static_cast<int64_t>(c) * kd + ky) * kd + kx;
                        out.at(row, col) = input.at(c, oy + ky, ox + kx);
                    }
                }
            }
        }
    }
    return out;
}

OutputMatrix gemm_output(const WeightMatrix& weights, const ImageMatrix& image,
                         const DatapathKind& datapath) {
    if (weights.cols != image.rows) {
        throw ValidationError(ErrorCode::ShapeMismatch,
                              "weight columns do not match image rows");
    }
    OutputMatrix out(image.cols, weights.rows);
    for (int64_t j = 0; j < image.cols; ++j) {
        for (int64_t r = 0; r < weights.rows; ++r) {
            int64_t acc = 0;
            for (int64_t k = 0; k < weights.cols; ++k) {
                const int64_t a = image.at(k, j);
                const int64_t w = weights.at(r, k);
                switch (datapath.type) {
                    case DatapathType::Xnor:
                        // bits encode +/-1 on both operands
                        acc += (2 * a - 1) * (2 * w - 1);
                        break;
                    case DatapathType::BinaryWeight:
                        acc += binary_weight_lane(a, static_cast<int>(w));
                        break;
                    case DatapathType::Standard:
                        acc += standard_lane(a, w);
                        break;
                }
            }
            out.at(j, r) = acc;
        }
    }
    return out;
}

std::vector<BitWord> pack_input_stream(const ImageMatrix& image, const FoldConfig& fold,
                                       const DatapathKind& datapath) {
    if (image.rows % fold.simd != 0) {
        throw ValidationError(ErrorCode::ShapeMismatch, "simd does not divide image rows");
    }
    const int bits = datapath.activation_bits();
    const bool xnor = datapath.type == DatapathType::Xnor;
    const int64_t bound = xnor ? 0 : int64_t{1} << (bits - 1);
    for (const int64_t e : image.data) {
        const bool ok = xnor ? (e == 0 || e == 1) : (e >= -bound && e < bound);
        if (!ok) {
            throw ValidationError(ErrorCode::PrecisionOutOfRange,
                                  "activation element outside the declared input precision");
        }
    }
    const int64_t beats_per_col = image.rows / fold.simd;
    std::vector<BitWord> beats;
    beats.reserve(size_t(image.cols) * beats_per_col);
    for (int64_t j = 0; j < image.cols; ++j) {
        for (int64_t s = 0; s < beats_per_col; ++s) {
            BitWord word(fold.simd * bits);
            for (int lane = 0; lane < fold.simd; ++lane) {
                word.set_lane(lane, bits, image.at(s * fold.simd + lane, j));
            }
            beats.push_back(std::move(word));
        }
    }
    return beats;
}

ImageMatrix unpack_input_stream(const std::vector<BitWord>& beats, int64_t rows,
                                const FoldConfig& fold, const DatapathKind& datapath) {
    if (rows % fold.simd != 0 || beats.size() % size_t(rows / fold.simd) != 0) {
        throw ValidationError(ErrorCode::ShapeMismatch, "beat count does not tile the matrix");
    }
    const int bits = datapath.activation_bits();
    const int64_t beats_per_col = rows / fold.simd;
    const int64_t cols = static_cast<int64_t>(beats.size()) / beats_per_col;
    ImageMatrix out(rows, cols);
    for (int64_t j = 0; j < cols; ++j) {
        for (int64_t s = 0; s < beats_per_col; ++s) {
            const BitWord& word = beats[size_t(j * beats_per_col + s)];
            for (int lane = 0; lane < fold.simd; ++lane) {
                out.at(s * fold.simd + lane, j) =
                    datapath.type == DatapathType::Xnor
                        ? static_cast<int64_t>(word.lane_unsigned(lane, 1))
                        : word.lane_signed(lane, bits);
            }
        }
    }
    return out;
}

}  // namespace mvusim
