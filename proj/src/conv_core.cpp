#include "conv_core.hpp"

namespace kanids::detail {

namespace {

// One sample's patches as rows: (out_h * out_w, patch); padding reads as zero.
void im2col(const ConvGeometry& g, const double* x, RowMatrix& cols) {
    const long pad = static_cast<long>(g.padding);
    const long height = static_cast<long>(g.height), width = static_cast<long>(g.width);
    double* row = cols.data();
    for (std::size_t i = 0; i < g.out_h; ++i)
        for (std::size_t j = 0; j < g.out_w; ++j)
            for (std::size_t c = 0; c < g.channels; ++c) {
                const double* plane = x + c * g.height * g.width;
                for (std::size_t m = 0; m < g.kernel_h; ++m) {
                    const long r = static_cast<long>(i + m) - pad;
                    for (std::size_t n = 0; n < g.kernel_w; ++n) {
                        const long s = static_cast<long>(j + n) - pad;
                        *row++ = (r >= 0 && r < height && s >= 0 && s < width) ? plane[r * width + s] : 0.0;
                    }
                }
            }
}

void col2im(const ConvGeometry& g, const RowMatrix& cols, double* dx) {
    const long pad = static_cast<long>(g.padding);
    const long height = static_cast<long>(g.height), width = static_cast<long>(g.width);
    const double* row = cols.data();
    for (std::size_t i = 0; i < g.out_h; ++i)
        for (std::size_t j = 0; j < g.out_w; ++j)
            for (std::size_t c = 0; c < g.channels; ++c) {
                double* plane = dx + c * g.height * g.width;
                for (std::size_t m = 0; m < g.kernel_h; ++m) {
                    const long r = static_cast<long>(i + m) - pad;
                    for (std::size_t n = 0; n < g.kernel_w; ++n, ++row) {
                        const long s = static_cast<long>(j + n) - pad;
                        if (r >= 0 && r < height && s >= 0 && s < width) plane[r * width + s] += *row;
                    }
                }
            }
}

}  // namespace

void conv_forward(const ConvGeometry& g, const double* x, const RowMatrix& kernel, double* out) {
    const auto plane = static_cast<Eigen::Index>(g.plane());
    const auto outputs = kernel.rows();
    RowMatrix cols(plane, static_cast<Eigen::Index>(g.patch()));
    const std::size_t in_stride = g.channels * g.height * g.width;
    for (std::size_t b = 0; b < g.batch; ++b) {
        im2col(g, x + b * in_stride, cols);
        Eigen::Map<RowMatrix> y(out + b * outputs * plane, outputs, plane);
        y.noalias() = kernel * cols.transpose();
    }
}

void conv_backward(const ConvGeometry& g, const double* x, const RowMatrix& kernel, const double* dout,
                   RowMatrix& dkernel, double* dx) {
    const auto plane = static_cast<Eigen::Index>(g.plane());
    const auto outputs = kernel.rows();
    RowMatrix cols(plane, static_cast<Eigen::Index>(g.patch()));
    RowMatrix dcols(plane, static_cast<Eigen::Index>(g.patch()));
    const std::size_t in_stride = g.channels * g.height * g.width;
    for (std::size_t b = 0; b < g.batch; ++b) {
        im2col(g, x + b * in_stride, cols);
        Eigen::Map<const RowMatrix> dy(dout + b * outputs * plane, outputs, plane);
        dkernel.noalias() += dy * cols;
        if (dx) {
            dcols.noalias() = dy.transpose() * kernel;
            col2im(g, dcols, dx + b * in_stride);
        }
    }
}

}  // namespace kanids::detail
