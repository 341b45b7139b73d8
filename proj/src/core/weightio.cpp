#include "core/weightio.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include "core/bitword.hpp"
#include "core/errors.hpp"

namespace mvusim {

namespace {

constexpr uint32_t kMatrixMagic = 0x5755564d;  // "MVUW"
constexpr uint32_t kTensorMagic = 0x5455564d;  // "MVUT"
constexpr uint32_t kFormatVersion = 1;

void write_u32(std::ostream& out, uint32_t v) {
    std::array<char, 4> b{static_cast<char>(v), static_cast<char>(v >> 8),
                          static_cast<char>(v >> 16), static_cast<char>(v >> 24)};
    out.write(b.data(), 4);
}

uint32_t read_u32(std::istream& in) {
    std::array<unsigned char, 4> b{};
    in.read(reinterpret_cast<char*>(b.data()), 4);
    return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
           static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
}

void write_packed(std::ostream& out, const std::vector<int64_t>& elems, int elem_bits) {
    // One long little-lane-first bit string, flushed in 64-bit chunks.
    uint64_t acc = 0;
    int filled = 0;
    auto flush_bytes = [&](int bits) {
        for (int i = 0; i < bits; i += 8) {
            const char byte = static_cast<char>(acc >> i);
            out.write(&byte, 1);
        }
        acc >>= bits;
        filled -= bits;
    };
    const uint64_t mask = elem_bits >= 64 ? ~uint64_t{0} : (uint64_t{1} << elem_bits) - 1;
    for (int64_t e : elems) {
        acc |= (static_cast<uint64_t>(e) & mask) << filled;
        filled += elem_bits;
        while (filled >= 8) flush_bytes(8);
    }
    if (filled > 0) flush_bytes(8);
}

std::vector<int64_t> read_packed(std::istream& in, size_t count, int elem_bits, bool signed_elems) {
    const size_t total_bits = count * static_cast<size_t>(elem_bits);
    const size_t nbytes = (total_bits + 7) / 8;
    std::vector<uint8_t> bytes(nbytes);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(nbytes));
    if (!in) throw IoError("truncated packed payload");
    std::vector<int64_t> out(count);
    for (size_t i = 0; i < count; ++i) {
        const size_t bit = i * static_cast<size_t>(elem_bits);
        uint64_t v = 0;
        for (int b = 0; b < elem_bits; ++b) {
            const size_t idx = bit + static_cast<size_t>(b);
            v |= static_cast<uint64_t>((bytes[idx / 8] >> (idx % 8)) & 1) << b;
        }
        out[i] = signed_elems ? BitWord::truncate_signed(static_cast<int64_t>(v), elem_bits)
                              : static_cast<int64_t>(v);
    }
    return out;
}

bool sniff_magic(const std::string& path, uint32_t magic) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open file: " + path);
    return read_u32(file) == magic && file.good();
}

}  // namespace

void save_weight_matrix_text(const WeightMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write file: " + path);
    out << m.rows << ' ' << m.cols << '\n';
    for (int64_t r = 0; r < m.rows; ++r) {
        for (int64_t c = 0; c < m.cols; ++c) {
            out << m.at(r, c) << (c + 1 == m.cols ? '\n' : ' ');
        }
    }
    if (!out) throw IoError("write failed: " + path);
}

void save_weight_matrix_binary(const WeightMatrix& m, const std::string& path, int elem_bits,
                               bool signed_elems) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    write_u32(out, kMatrixMagic);
    write_u32(out, kFormatVersion);
    write_u32(out, static_cast<uint32_t>(m.rows));
    write_u32(out, static_cast<uint32_t>(m.cols));
    write_u32(out, static_cast<uint32_t>(elem_bits));
    write_u32(out, signed_elems ? 1u : 0u);
    write_packed(out, m.data, elem_bits);
    if (!out) throw IoError("write failed: " + path);
}

WeightMatrix load_weight_matrix(const std::string& path) {
    if (sniff_magic(path, kMatrixMagic)) {
        std::ifstream in(path, std::ios::binary);
        read_u32(in);  // magic
        const uint32_t version = read_u32(in);
        if (version != kFormatVersion) throw IoError("unsupported matrix file version");
        const int64_t rows = read_u32(in);
        const int64_t cols = read_u32(in);
        const int elem_bits = static_cast<int>(read_u32(in));
        const bool signed_elems = (read_u32(in) & 1) != 0;
        if (rows < 1 || cols < 1 || elem_bits < 1 || elem_bits > 63) {
            throw IoError("corrupt matrix header in " + path);
        }
        WeightMatrix m(rows, cols);
        m.data = read_packed(in, static_cast<size_t>(rows) * static_cast<size_t>(cols), elem_bits,
                             signed_elems);
        return m;
    }
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    int64_t rows = 0;
    int64_t cols = 0;
    if (!(in >> rows >> cols) || rows < 1 || cols < 1) {
        throw IoError("bad matrix header in " + path);
    }
    WeightMatrix m(rows, cols);
    for (auto& e : m.data) {
        if (!(in >> e)) throw IoError("truncated matrix data in " + path);
    }
    return m;
}

void save_tensor_text(const Tensor3& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write file: " + path);
    out << t.channels << ' ' << t.height << ' ' << t.width << '\n';
    for (int c = 0; c < t.channels; ++c) {
        for (int y = 0; y < t.height; ++y) {
            for (int x = 0; x < t.width; ++x) {
                out << t.at(c, y, x) << (x + 1 == t.width ? '\n' : ' ');
            }
        }
    }
    if (!out) throw IoError("write failed: " + path);
}

void save_tensor_binary(const Tensor3& t, const std::string& path, int elem_bits,
                        bool signed_elems) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    write_u32(out, kTensorMagic);
    write_u32(out, kFormatVersion);
    write_u32(out, static_cast<uint32_t>(t.channels));
    write_u32(out, static_cast<uint32_t>(t.height));
    write_u32(out, static_cast<uint32_t>(t.width));
    write_u32(out, static_cast<uint32_t>(elem_bits));
    write_u32(out, signed_elems ? 1u : 0u);
    write_packed(out, t.data, elem_bits);
    if (!out) throw IoError("write failed: " + path);
}

Tensor3 load_tensor(const std::string& path) {
    if (sniff_magic(path, kTensorMagic)) {
        std::ifstream in(path, std::ios::binary);
        read_u32(in);
        const uint32_t version = read_u32(in);
        if (version != kFormatVersion) throw IoError("unsupported tensor file version");
        const int channels = static_cast<int>(read_u32(in));
        const int height = static_cast<int>(read_u32(in));
        const int width = static_cast<int>(read_u32(in));
        const int elem_bits = static_cast<int>(read_u32(in));
        const bool signed_elems = (read_u32(in) & 1) != 0;
        if (channels < 1 || height < 1 || width < 1 || elem_bits < 1 || elem_bits > 63) {
            throw IoError("corrupt tensor header in " + path);
        }
        Tensor3 t(channels, height, width);
        t.data = read_packed(in, t.size(), elem_bits, signed_elems);
        return t;
    }
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    int channels = 0, height = 0, width = 0;
    if (!(in >> channels >> height >> width) || channels < 1 || height < 1 || width < 1) {
        throw IoError("bad tensor header in " + path);
    }
    Tensor3 t(channels, height, width);
    for (auto& e : t.data) {
        if (!(in >> e)) throw IoError("truncated tensor data in " + path);
    }
    return t;
}

namespace {

int64_t random_activation(const DatapathKind& kind, std::mt19937_64& rng) {
    if (kind.type == DatapathType::Xnor) {
        return static_cast<int64_t>(rng() & 1);
    }
    const int bits = kind.input_bits;
    std::uniform_int_distribution<int64_t> dist(-(int64_t{1} << (bits - 1)),
                                                (int64_t{1} << (bits - 1)) - 1);
    return dist(rng);
}

int64_t random_weight(const DatapathKind& kind, std::mt19937_64& rng) {
    if (kind.type != DatapathType::Standard) {
        return static_cast<int64_t>(rng() & 1);
    }
    const int bits = kind.weight_bits;
    std::uniform_int_distribution<int64_t> dist(-(int64_t{1} << (bits - 1)),
                                                (int64_t{1} << (bits - 1)) - 1);
    return dist(rng);
}

}  // namespace

WeightMatrix random_weight_matrix(const LayerConfig& cfg, std::mt19937_64& rng) {
    WeightMatrix m(cfg.shape().ofm_channels, cfg.shape().matrix_rows());
    for (auto& e : m.data) e = random_weight(cfg.datapath(), rng);
    return m;
}

ImageMatrix random_image_matrix(const LayerConfig& cfg, int64_t cols, std::mt19937_64& rng) {
    ImageMatrix image(cfg.shape().matrix_rows(), cols);
    for (auto& e : image.data) e = random_activation(cfg.datapath(), rng);
    return image;
}

Tensor3 random_tensor(const LayerConfig& cfg, std::mt19937_64& rng) {
    Tensor3 t(cfg.shape().ifm_channels, cfg.shape().ifm_dim, cfg.shape().ifm_dim);
    for (auto& e : t.data) e = random_activation(cfg.datapath(), rng);
    return t;
}

WeightMatrix load_weights_for(const LayerConfig& cfg, const std::string& path) {
    WeightMatrix m = load_weight_matrix(path);
    if (m.rows != cfg.shape().ofm_channels || m.cols != cfg.shape().matrix_rows()) {
        std::ostringstream msg;
        msg << "weight file " << path << " is " << m.rows << "x" << m.cols << ", layer needs "
            << cfg.shape().ofm_channels << "x" << cfg.shape().matrix_rows();
        throw ValidationError(ErrorCode::ShapeMismatch, msg.str());
    }
    const DatapathKind& kind = cfg.datapath();
    for (const int64_t e : m.data) {
        if (kind.type != DatapathType::Standard) {
            if (e != 0 && e != 1) {
                throw ValidationError(ErrorCode::PrecisionOutOfRange,
                                      "binary weights must be 0 or 1 in " + path);
            }
        } else {
            const int64_t bound = int64_t{1} << (kind.weight_bits - 1);
            if (e < -bound || e >= bound) {
                throw ValidationError(ErrorCode::PrecisionOutOfRange,
                                      "weight exceeds declared precision in " + path);
            }
        }
    }
    return m;
}

}  // namespace mvusim
