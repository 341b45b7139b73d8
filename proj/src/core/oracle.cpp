#include "core/oracle.hpp"

#include "core/errors.hpp"

namespace mvusim::oracle {

std::vector<int64_t> reference_mvp(const WeightMatrix& weights, const std::vector<int64_t>& x,
                                   const DatapathKind& kind) {
    if (static_cast<int64_t>(x.size()) != weights.cols) {
        throw ValidationError(ErrorCode::ShapeMismatch, "vector length does not match weights");
    }
    std::vector<int64_t> out(static_cast<size_t>(weights.rows), 0);
    for (int64_t r = 0; r < weights.rows; ++r) {
        __int128 sum = 0;
        for (int64_t k = 0; k < weights.cols; ++k) {
            const int64_t a = x[static_cast<size_t>(k)];
            const int64_t w = weights.at(r, k);
            switch (kind.type) {
                case DatapathType::Xnor:
                    sum += static_cast<__int128>(2 * a - 1) * (2 * w - 1);
                    break;
                case DatapathType::BinaryWeight:
                    sum += static_cast<__int128>(w == 1 ? a : -a);
                    break;
                case DatapathType::Standard:
                    sum += static_cast<__int128>(a) * w;
                    break;
            }
        }
        out[static_cast<size_t>(r)] = static_cast<int64_t>(sum);
    }
    return out;
}

Tensor3 reference_conv(const Tensor3& input, const KernelStack& kernels) {
    if (input.channels != kernels.ifm_channels || kernels.kernel_dim > input.height ||
        input.height != input.width) {
        throw ValidationError(ErrorCode::ShapeMismatch, "kernel stack does not match input");
    }
    const int kd = kernels.kernel_dim;
    const int od = input.height - kd + 1;
    Tensor3 out(kernels.ofm_channels, od, od);
    for (int oc = 0; oc < kernels.ofm_channels; ++oc) {
        for (int oy = 0; oy < od; ++oy) {
            for (int ox = 0; ox < od; ++ox) {
                __int128 sum = 0;
                for (int ic = 0; ic < input.channels; ++ic) {
                    for (int ky = 0; ky < kd; ++ky) {
                        for (int kx = 0; kx < kd; ++kx) {
                            sum += static_cast<__int128>(input.at(ic, oy + ky, ox + kx)) *
                                   kernels.at(oc, ic, ky, kx);
                        }
                    }
                }
                out.at(oc, oy, ox) = static_cast<int64_t>(sum);
            }
        }
    }
    return out;
}

WeightMatrix kernels_to_weight_matrix(const KernelStack& kernels) {
    const int kd = kernels.kernel_dim;
    WeightMatrix out(kernels.ofm_channels,
                     static_cast<int64_t>(kd) * kd * kernels.ifm_channels);
    for (int oc = 0; oc < kernels.ofm_channels; ++oc) {
        for (int ic = 0; ic < kernels.ifm_channels; ++ic) {
            for (int ky = 0; ky < kd; ++ky) {
                for (int kx = 0; kx < kd; ++kx) {
                    out.at(oc, (static_cast<int64_t>(ic) * kd + ky) * kd + kx) =
                        kernels.at(oc, ic, ky, kx);
                }
            }
        }
    }
    return out;
}

}  // namespace mvusim::oracle
