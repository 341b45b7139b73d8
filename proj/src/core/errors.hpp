#pragma once

#include <stdexcept>
#include <string>

namespace mvusim {

// Error taxonomy. The numeric category maps 1:1 onto process exit codes
// (0 ok, 1 validation, 2 io, 3 internal) and onto the C API status codes.
enum class ErrorCode {
    NonDivisiblePe,
    NonDivisibleSimd,
    ShapeMismatch,
    ZeroDimension,
    PrecisionOutOfRange,
    AccumulatorTooWide,
    IncompatibleLayers,
    LayoutCorrupt,
    OutOfRange,
    ParseError,
    IoError,
    FifoOverflow,
    AccumulatorOverflow,
    InternalInvariant,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& msg)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + msg), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

// Bad user input: shapes, folds, precisions, layer chaining.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Malformed config file; carries the offending position.
class ParseError : public Error {
public:
    ParseError(int line, int column, const std::string& msg)
        : Error(ErrorCode::ParseError,
                "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg),
          line_(line),
          column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(ErrorCode::IoError, msg) {}
};

// A broken internal contract (fifo overflow, accumulator overflow, corrupt
// layout). Reaching one of these is a simulator bug, not a user error.
class InternalError : public Error {
public:
    using Error::Error;
};

// Exit-code / C-status category of an error.
int error_category(ErrorCode code);

}  // namespace mvusim
