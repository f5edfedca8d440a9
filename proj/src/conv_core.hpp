#pragma once

#include <cstddef>

#include "eigen_map.hpp"

namespace kanids::detail {

struct ConvGeometry {
    std::size_t batch, channels, height, width;
    std::size_t kernel_h, kernel_w, padding;
    std::size_t out_h, out_w;

    std::size_t patch() const { return channels * kernel_h * kernel_w; }
    std::size_t plane() const { return out_h * out_w; }
};

/// out (batch, O, out_h, out_w) = cross-correlation of x with kernel (O, patch); no bias.
void conv_forward(const ConvGeometry& g, const double* x, const RowMatrix& kernel, double* out);

/// Accumulates into dkernel (O, patch) and, when dx is non-null, into dx (batch, C, H, W).
void conv_backward(const ConvGeometry& g, const double* x, const RowMatrix& kernel, const double* dout,
                   RowMatrix& dkernel, double* dx);

}  // namespace kanids::detail
