#include "core/config.hpp"

#include <sstream>

#include "core/errors.hpp"

namespace mvusim {

namespace {

constexpr int kMaxPrecisionBits = 32;

int ceil_log2(int64_t n) {
    int bits = 0;
    int64_t v = 1;
    while (v < n) {
        v <<= 1;
        ++bits;
    }
    return bits;
}

// Smallest signed width w such that every reachable dot-product value
// satisfies |value| < 2^(w-1), with lane_count = K_d^2 * I_c terms.
int required_accumulator_bits(const DatapathKind& kind, int64_t lane_count) {
    switch (kind.type) {
        case DatapathType::Xnor:
            // values in [-lane_count, +lane_count]
            return ceil_log2(lane_count) + 2;
        case DatapathType::BinaryWeight:
            // |sum| <= lane_count * 2^(input_bits-1)
            return kind.input_bits + ceil_log2(lane_count) + 1;
        case DatapathType::Standard:
            // |sum| <= lane_count * 2^(input_bits-1) * 2^(weight_bits-1)
            return kind.input_bits + kind.weight_bits + ceil_log2(lane_count) + 1;
    }
    return 64;
}

}  // namespace

const char* datapath_type_name(DatapathType type) {
    switch (type) {
        case DatapathType::Xnor: return "xnor";
        case DatapathType::BinaryWeight: return "binary-weight";
        case DatapathType::Standard: return "standard";
    }
    return "?";
}

bool operator==(const LayerShape& a, const LayerShape& b) {
    return a.kernel_dim == b.kernel_dim && a.ifm_channels == b.ifm_channels &&
           a.ifm_dim == b.ifm_dim && a.ofm_channels == b.ofm_channels && a.ofm_dim == b.ofm_dim;
}

bool operator==(const FoldConfig& a, const FoldConfig& b) {
    return a.pe == b.pe && a.simd == b.simd;
}

LayerConfig LayerConfig::validate(const LayerShape& shape, const FoldConfig& fold,
                                  const DatapathKind& datapath) {
    if (shape.kernel_dim < 1 || shape.ifm_channels < 1 || shape.ifm_dim < 1 ||
        shape.ofm_channels < 1 || shape.ofm_dim < 1 || fold.pe < 1 || fold.simd < 1) {
        throw ValidationError(ErrorCode::ZeroDimension,
                              "all shape and fold parameters must be >= 1");
    }
    if (shape.kernel_dim > shape.ifm_dim) {
        throw ValidationError(ErrorCode::ShapeMismatch, "kernel_dim exceeds ifm_dim");
    }
    if (shape.ofm_dim != shape.ifm_dim - shape.kernel_dim + 1) {
        std::ostringstream msg;
        msg << "ofm_dim must be ifm_dim - kernel_dim + 1 = "
            << shape.ifm_dim - shape.kernel_dim + 1 << ", got " << shape.ofm_dim;
        throw ValidationError(ErrorCode::ShapeMismatch, msg.str());
    }
    if (shape.ofm_channels % fold.pe != 0) {
        std::ostringstream msg;
        msg << "pe = " << fold.pe << " does not divide ofm_channels = " << shape.ofm_channels;
        throw ValidationError(ErrorCode::NonDivisiblePe, msg.str());
    }
    const int64_t rows = shape.matrix_rows();
    if (rows % fold.simd != 0) {
        std::ostringstream msg;
        msg << "simd = " << fold.simd << " does not divide kernel_dim^2 * ifm_channels = " << rows;
        throw ValidationError(ErrorCode::NonDivisibleSimd, msg.str());
    }

    switch (datapath.type) {
        case DatapathType::Xnor:
            if (datapath.input_bits != 1 || datapath.weight_bits != 1) {
                throw ValidationError(ErrorCode::PrecisionOutOfRange,
                                      "xnor datapath implies 1-bit inputs and weights");
            }
            break;
        case DatapathType::BinaryWeight:
            if (datapath.weight_bits != 1) {
                throw ValidationError(ErrorCode::PrecisionOutOfRange,
                                      "binary-weight datapath implies 1-bit weights");
            }
            if (datapath.input_bits < 1 || datapath.input_bits > kMaxPrecisionBits) {
                throw ValidationError(ErrorCode::PrecisionOutOfRange,
                                      "input_bits must be in 1..32");
            }
            break;
        case DatapathType::Standard:
            if (datapath.input_bits < 1 || datapath.input_bits > kMaxPrecisionBits) {
                throw ValidationError(ErrorCode::PrecisionOutOfRange,
                                      "input_bits must be in 1..32");
            }
            if (datapath.weight_bits < 2 || datapath.weight_bits > kMaxPrecisionBits) {
                throw ValidationError(ErrorCode::PrecisionOutOfRange,
                                      "weight_bits must be in 2..32 for the standard datapath");
            }
            break;
    }

    // Accumulators are simulated in int64, so the analytic width must leave
    // the sign bit representable.
    const int acc_bits = required_accumulator_bits(datapath, rows);
    if (acc_bits > 63) {
        std::ostringstream msg;
        msg << "required accumulator width " << acc_bits << " exceeds the supported 63 bits";
        throw ValidationError(ErrorCode::AccumulatorTooWide, msg.str());
    }

    return LayerConfig(shape, fold, datapath, acc_bits);
}

std::string LayerConfig::describe() const {
    std::ostringstream out;
    out << "K=" << shape_.kernel_dim << " Ic=" << shape_.ifm_channels << " Id=" << shape_.ifm_dim
        << " Oc=" << shape_.ofm_channels << " Od=" << shape_.ofm_dim << " PE=" << fold_.pe
        << " SIMD=" << fold_.simd << " " << datapath_type_name(datapath_.type) << "("
        << datapath_.input_bits << "," << datapath_.weight_bits << ")";
    return out.str();
}

}  // namespace mvusim
