#pragma once

#include <cstdint>
#include <vector>

#include "core/config.hpp"
#include "core/lowering.hpp"

namespace mvusim::oracle {

// Brute-force references kept deliberately independent of the simulator
// datapath: plain loops, explicit +/-1 decoding, wide intermediate
// arithmetic. Equivalence tests against these are the ground truth for every
// datapath and scheduling claim.

// 4-D kernel stack for direct convolution, indexed (oc, ic, ky, kx).
struct KernelStack {
    int ofm_channels = 0;
    int ifm_channels = 0;
    int kernel_dim = 0;
    std::vector<int64_t> data;

    KernelStack() = default;
    KernelStack(int oc, int ic, int kd)
        : ofm_channels(oc), ifm_channels(ic), kernel_dim(kd),
          data(size_t(oc) * ic * kd * kd, 0) {}

    int64_t& at(int oc, int ic, int ky, int kx) {
        return data[((size_t(oc) * ifm_channels + ic) * kernel_dim + ky) * kernel_dim + kx];
    }
    int64_t at(int oc, int ic, int ky, int kx) const {
        return data[((size_t(oc) * ifm_channels + ic) * kernel_dim + ky) * kernel_dim + kx];
    }
};

// Naive matrix-vector product under the given datapath semantics: a plain
// double loop with no folding or streaming.
std::vector<int64_t> reference_mvp(const WeightMatrix& weights, const std::vector<int64_t>& x,
                                   const DatapathKind& kind);

// Direct stride-1, zero-padding-free convolution via a quadruple loop.
// Equals im2col followed by gemm_output after reshaping.
Tensor3 reference_conv(const Tensor3& input, const KernelStack& kernels);

// Flattens kernels into the O_c x K_d^2*I_c weight-matrix layout
// (channel-major rows, then kernel row, then kernel column).
WeightMatrix kernels_to_weight_matrix(const KernelStack& kernels);

}  // namespace mvusim::oracle
