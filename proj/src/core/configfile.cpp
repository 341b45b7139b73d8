#include "core/configfile.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "core/errors.hpp"

namespace mvusim {

namespace {

struct Token {
    std::string text;
    int line = 0;
    int column = 0;
};

struct Section {
    std::string name;
    int line = 0;
    std::vector<std::pair<Token, Token>> entries;  // key, value
};

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    size_t e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<Section> tokenize(const std::string& text) {
    std::vector<Section> sections;
    std::istringstream stream(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(stream, raw)) {
        ++line_no;
        std::string line = raw;
        if (size_t hash = line.find('#'); hash != std::string::npos) line = line.substr(0, hash);
        std::string body = trim(line);
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']') throw ParseError(line_no, 1, "unterminated section header");
            sections.push_back({trim(body.substr(1, body.size() - 2)), line_no, {}});
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(line_no, 1, "expected 'key = value'");
        }
        if (sections.empty()) {
            throw ParseError(line_no, 1, "entry outside any [section]");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError(line_no, 1, "empty key");
        if (value.empty()) throw ParseError(line_no, static_cast<int>(eq) + 2, "empty value");
        const int key_col = static_cast<int>(line.find_first_not_of(" \t")) + 1;
        const int val_col = static_cast<int>(line.find(value, eq)) + 1;
        sections.back().entries.push_back(
            {{key, line_no, key_col}, {value, line_no, val_col}});
    }
    return sections;
}

int64_t parse_int(const Token& tok) {
    try {
        size_t pos = 0;
        const int64_t v = std::stoll(tok.text, &pos);
        if (pos != tok.text.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ParseError(tok.line, tok.column, "expected an integer, got '" + tok.text + "'");
    }
}

DatapathType parse_datapath_type(const Token& tok) {
    std::string v = tok.text;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) {
        return c == '_' ? '-' : std::tolower(c);
    });
    if (v == "xnor") return DatapathType::Xnor;
    if (v == "binary-weight" || v == "binary-weights") return DatapathType::BinaryWeight;
    if (v == "standard") return DatapathType::Standard;
    throw ParseError(tok.line, tok.column,
                     "unknown datapath '" + tok.text + "' (xnor, binary-weight, standard)");
}

std::vector<Token> split_list(const Token& tok) {
    std::vector<Token> out;
    std::string item;
    int col = tok.column;
    int item_col = col;
    for (size_t i = 0; i <= tok.text.size(); ++i, ++col) {
        if (i == tok.text.size() || tok.text[i] == ',') {
            std::string t = trim(item);
            if (!t.empty()) out.push_back({t, tok.line, item_col});
            item.clear();
            item_col = col + 1;
        } else {
            if (item.empty() && !std::isspace(static_cast<unsigned char>(tok.text[i]))) {
                item_col = col;
            }
            item += tok.text[i];
        }
    }
    if (out.empty()) throw ParseError(tok.line, tok.column, "empty list");
    return out;
}

struct LayerFields {
    LayerSpec spec;
    std::optional<SweptParameter> swept;
    int swept_line = 0;
    int swept_column = 0;
};

LayerFields read_layer_section(const Section& section, bool allow_star) {
    LayerFields out;
    std::map<std::string, bool> seen;
    std::optional<int> input_bits;
    std::optional<int> weight_bits;
    std::optional<DatapathType> type;

    auto mark_star = [&](SweptParameter p, const Token& tok) {
        if (!allow_star) {
            throw ParseError(tok.line, tok.column, "'*' is only allowed with a [sweep] section");
        }
        if (out.swept) {
            throw ParseError(tok.line, tok.column, "only one parameter may be swept");
        }
        out.swept = p;
        out.swept_line = tok.line;
        out.swept_column = tok.column;
    };

    for (const auto& [key, value] : section.entries) {
        if (seen[key.text]) {
            throw ParseError(key.line, key.column, "duplicate key '" + key.text + "'");
        }
        seen[key.text] = true;
        const bool star = value.text == "*";
        if (key.text == "ifm_channels") {
            if (star) mark_star(SweptParameter::IfmChannels, value);
            else out.spec.shape.ifm_channels = static_cast<int>(parse_int(value));
        } else if (key.text == "ifm_dim") {
            if (star) mark_star(SweptParameter::IfmDim, value);
            else out.spec.shape.ifm_dim = static_cast<int>(parse_int(value));
        } else if (key.text == "ofm_channels") {
            if (star) mark_star(SweptParameter::OfmChannels, value);
            else out.spec.shape.ofm_channels = static_cast<int>(parse_int(value));
        } else if (key.text == "kernel_dim") {
            if (star) mark_star(SweptParameter::KernelDim, value);
            else out.spec.shape.kernel_dim = static_cast<int>(parse_int(value));
        } else if (key.text == "ofm_dim") {
            out.spec.shape.ofm_dim = static_cast<int>(parse_int(value));
            out.spec.ofm_dim_given = true;
        } else if (key.text == "pe") {
            if (star) mark_star(SweptParameter::Pe, value);
            else out.spec.fold.pe = static_cast<int>(parse_int(value));
        } else if (key.text == "simd") {
            if (star) mark_star(SweptParameter::Simd, value);
            else out.spec.fold.simd = static_cast<int>(parse_int(value));
        } else if (key.text == "datapath") {
            type = parse_datapath_type(value);
        } else if (key.text == "input_bits") {
            input_bits = static_cast<int>(parse_int(value));
        } else if (key.text == "weight_bits") {
            weight_bits = static_cast<int>(parse_int(value));
        } else if (key.text == "weights") {
            out.spec.weights_path = value.text;
        } else {
            throw ParseError(key.line, key.column, "unknown key '" + key.text + "'");
        }
    }

    const DatapathType t = type.value_or(DatapathType::Standard);
    switch (t) {
        case DatapathType::Xnor:
            out.spec.datapath = DatapathKind::xnor();
            break;
        case DatapathType::BinaryWeight:
            out.spec.datapath = DatapathKind::binary_weight(input_bits.value_or(4));
            break;
        case DatapathType::Standard:
            out.spec.datapath =
                DatapathKind::standard(input_bits.value_or(4), weight_bits.value_or(4));
            break;
    }
    return out;
}

}  // namespace

const char* swept_parameter_name(SweptParameter p) {
    switch (p) {
        case SweptParameter::IfmChannels: return "ifm_channels";
        case SweptParameter::IfmDim: return "ifm_dim";
        case SweptParameter::OfmChannels: return "ofm_channels";
        case SweptParameter::KernelDim: return "kernel_dim";
        case SweptParameter::Pe: return "pe";
        case SweptParameter::Simd: return "simd";
    }
    return "?";
}

LayerConfig LayerSpec::validate() const {
    LayerShape s = shape;
    if (!ofm_dim_given) {
        s.ofm_dim = s.ifm_dim - s.kernel_dim + 1;
    }
    return LayerConfig::validate(s, fold, datapath);
}

LayerConfig SweepSpec::config_for(int64_t value, const DatapathKind& kind) const {
    LayerSpec spec = base;
    spec.datapath = kind;
    switch (parameter) {
        case SweptParameter::IfmChannels: spec.shape.ifm_channels = static_cast<int>(value); break;
        case SweptParameter::IfmDim: spec.shape.ifm_dim = static_cast<int>(value); break;
        case SweptParameter::OfmChannels: spec.shape.ofm_channels = static_cast<int>(value); break;
        case SweptParameter::KernelDim: spec.shape.kernel_dim = static_cast<int>(value); break;
        case SweptParameter::Pe: spec.fold.pe = static_cast<int>(value); break;
        case SweptParameter::Simd: spec.fold.simd = static_cast<int>(value); break;
    }
    if (parameter == SweptParameter::IfmDim || parameter == SweptParameter::KernelDim) {
        spec.ofm_dim_given = false;  // re-derive per point
    }
    return spec.validate();
}

ParsedConfig parse_config_text(const std::string& text) {
    const std::vector<Section> sections = tokenize(text);
    if (sections.empty()) throw ParseError(1, 1, "no sections found");

    std::vector<const Section*> layer_sections;
    const Section* sweep_section = nullptr;
    for (const auto& s : sections) {
        if (s.name == "layer" || s.name.rfind("layer ", 0) == 0) {
            layer_sections.push_back(&s);
        } else if (s.name == "sweep") {
            if (sweep_section) throw ParseError(s.line, 1, "duplicate [sweep] section");
            sweep_section = &s;
        } else {
            throw ParseError(s.line, 1, "unknown section [" + s.name + "]");
        }
    }
    if (layer_sections.empty()) {
        throw ParseError(sections.front().line, 1, "expected at least one [layer] section");
    }

    if (sweep_section) {
        if (layer_sections.size() != 1) {
            throw ParseError(sweep_section->line, 1, "a sweep takes exactly one [layer] section");
        }
        LayerFields fields = read_layer_section(*layer_sections[0], true);
        if (!fields.swept) {
            throw ParseError(sweep_section->line, 1,
                             "[sweep] present but no layer parameter is '*'");
        }
        SweepSpec spec;
        spec.base = fields.spec;
        spec.parameter = *fields.swept;
        bool have_values = false;
        for (const auto& [key, value] : sweep_section->entries) {
            if (key.text == "values") {
                for (const Token& tok : split_list(value)) {
                    spec.values.push_back(parse_int(tok));
                }
                have_values = true;
            } else if (key.text == "datapaths") {
                for (const Token& tok : split_list(value)) {
                    switch (parse_datapath_type(tok)) {
                        case DatapathType::Xnor:
                            spec.kinds.push_back(DatapathKind::xnor());
                            break;
                        case DatapathType::BinaryWeight:
                            spec.kinds.push_back(
                                DatapathKind::binary_weight(fields.spec.datapath.input_bits));
                            break;
                        case DatapathType::Standard:
                            spec.kinds.push_back(DatapathKind::standard(
                                fields.spec.datapath.input_bits,
                                std::max(2, fields.spec.datapath.weight_bits)));
                            break;
                    }
                }
            } else {
                throw ParseError(key.line, key.column, "unknown sweep key '" + key.text + "'");
            }
        }
        if (!have_values) {
            throw ParseError(sweep_section->line, 1, "[sweep] requires a 'values' list");
        }
        if (spec.kinds.empty()) spec.kinds.push_back(fields.spec.datapath);
        // Every point must validate so errors surface at parse time.
        for (const auto& kind : spec.kinds) {
            for (int64_t v : spec.values) {
                spec.config_for(v, kind);
            }
        }
        return spec;
    }

    if (layer_sections.size() == 1) {
        LayerFields fields = read_layer_section(*layer_sections[0], false);
        fields.spec.validate();
        return fields.spec;
    }

    PipelineSpec pipeline;
    for (const Section* s : layer_sections) {
        LayerFields fields = read_layer_section(*s, false);
        fields.spec.validate();
        pipeline.layers.push_back(fields.spec);
    }
    return pipeline;
}

ParsedConfig parse_config_file(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open config file: " + path);
    std::ostringstream text;
    text << file.rdbuf();
    return parse_config_text(text.str());
}

}  // namespace mvusim
