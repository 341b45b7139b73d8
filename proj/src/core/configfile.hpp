#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "core/config.hpp"

namespace mvusim {

// Raw layer description as read from a config file; validation happens on
// demand so error messages can refer to the file.
struct LayerSpec {
    LayerShape shape;
    bool ofm_dim_given = false;
    FoldConfig fold;
    DatapathKind datapath = DatapathKind::standard(4, 4);
    std::optional<std::string> weights_path;

    LayerConfig validate() const;
};

enum class SweptParameter { IfmChannels, IfmDim, OfmChannels, KernelDim, Pe, Simd };

const char* swept_parameter_name(SweptParameter p);

// One-parameter sweep: the base layer with a '*' in exactly one field, the
// values that replace it, and the datapath kinds to cover.
struct SweepSpec {
    LayerSpec base;
    SweptParameter parameter;
    std::vector<int64_t> values;
    std::vector<DatapathKind> kinds;

    // Instantiates and validates one sweep point.
    LayerConfig config_for(int64_t value, const DatapathKind& kind) const;
};

struct PipelineSpec {
    std::vector<LayerSpec> layers;
};

using ParsedConfig = std::variant<LayerSpec, SweepSpec, PipelineSpec>;

// Parses the key/value section format described in the README. Throws
// ParseError with line/column on malformed input and ValidationError when the
// described layer violates a config invariant.
ParsedConfig parse_config_text(const std::string& text);
ParsedConfig parse_config_file(const std::string& path);

}  // namespace mvusim
