#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "core/config.hpp"
#include "core/lowering.hpp"

namespace mvusim {

// Matrix and tensor file formats.
//
// Text matrix: first line "rows cols", then one line of integers per row.
// Binary matrix ("MVUW"): u32 magic, version, rows, cols, elem_bits, flags
// (bit 0: elements are signed), then elements bit-packed little-lane-first in
// row-major order, padded to a whole byte. Loaders sniff the magic, so either
// format may be passed wherever a matrix file is expected.

void save_weight_matrix_text(const WeightMatrix& m, const std::string& path);
void save_weight_matrix_binary(const WeightMatrix& m, const std::string& path, int elem_bits,
                               bool signed_elems);
WeightMatrix load_weight_matrix(const std::string& path);

// Tensor files use the same two encodings with header "channels height
// width" (text) or magic "MVUT" (binary).
void save_tensor_text(const Tensor3& t, const std::string& path);
void save_tensor_binary(const Tensor3& t, const std::string& path, int elem_bits,
                        bool signed_elems);
Tensor3 load_tensor(const std::string& path);

// Seeded stimulus generators. Values cover the full representable range of
// the datapath's declared precisions.
WeightMatrix random_weight_matrix(const LayerConfig& cfg, std::mt19937_64& rng);
ImageMatrix random_image_matrix(const LayerConfig& cfg, int64_t cols, std::mt19937_64& rng);
Tensor3 random_tensor(const LayerConfig& cfg, std::mt19937_64& rng);

// Loads weights for a layer, checking dimensions and element ranges against
// the config. Throws ValidationError on any mismatch.
WeightMatrix load_weights_for(const LayerConfig& cfg, const std::string& path);

}  // namespace mvusim
