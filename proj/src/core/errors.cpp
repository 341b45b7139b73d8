#include "core/errors.hpp"

namespace mvusim {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::NonDivisiblePe: return "NonDivisiblePe";
        case ErrorCode::NonDivisibleSimd: return "NonDivisibleSimd";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::ZeroDimension: return "ZeroDimension";
        case ErrorCode::PrecisionOutOfRange: return "PrecisionOutOfRange";
        case ErrorCode::AccumulatorTooWide: return "AccumulatorTooWide";
        case ErrorCode::IncompatibleLayers: return "IncompatibleLayers";
        case ErrorCode::LayoutCorrupt: return "LayoutCorrupt";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::FifoOverflow: return "FifoOverflow";
        case ErrorCode::AccumulatorOverflow: return "AccumulatorOverflow";
        case ErrorCode::InternalInvariant: return "InternalInvariant";
    }
    return "UnknownError";
}

int error_category(ErrorCode code) {
    switch (code) {
        case ErrorCode::ParseError:
        case ErrorCode::NonDivisiblePe:
        case ErrorCode::NonDivisibleSimd:
        case ErrorCode::ShapeMismatch:
        case ErrorCode::ZeroDimension:
        case ErrorCode::PrecisionOutOfRange:
        case ErrorCode::AccumulatorTooWide:
        case ErrorCode::IncompatibleLayers:
        case ErrorCode::OutOfRange:
            return 1;
        case ErrorCode::IoError:
            return 2;
        case ErrorCode::LayoutCorrupt:
        case ErrorCode::FifoOverflow:
        case ErrorCode::AccumulatorOverflow:
        case ErrorCode::InternalInvariant:
            return 3;
    }
    return 3;
}

}  // namespace mvusim
