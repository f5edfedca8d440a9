#include "kanids/kan.hpp"

#include <cmath>

#include "conv_core.hpp"
#include "eigen_map.hpp"
#include "kanids/error.hpp"

namespace kanids {

using detail::as_matrix;
using detail::RowMatrix;

double silu(double x) { return x * sigmoid(x); }

double silu_grad(double x) {
    const double s = sigmoid(x);
    return s + x * s * (1.0 - s);
}

namespace {

// K spline basis values followed by silu(u), and the matching derivatives.
void expand_value(const SplineGrid& grid, double u, double* feature, double* slope) {
    const std::size_t k = grid.basis_count();
    eval_basis_into(grid, u, std::span<double>(feature, k), std::span<double>(slope, k));
    feature[k] = silu(u);
    slope[k] = silu_grad(u);
}

void add_edge_params(LayerParams& params, std::size_t out, std::size_t edges, const SplineGrid& grid,
                     double base_bound, Rng& rng) {
    const std::size_t k = grid.basis_count();
    const double coeff_bound = 0.1 / std::sqrt(static_cast<double>(k));
    params.add("spline_coeffs", uniform_tensor({out, edges, k}, coeff_bound, rng));
    params.add("base_weight", uniform_tensor({out, edges}, base_bound, rng));
    params.add("edge_scale", Tensor({out, edges}, 1.0));
}

double edge_value(const LayerParams& params, const SplineGrid& grid, std::size_t edges, std::size_t edge,
                  std::size_t out, double u) {
    const std::size_t k = grid.basis_count();
    const auto basis = eval_basis(grid, u);
    const double* coeffs = params.get("spline_coeffs").value.data() + (out * edges + edge) * k;
    double spline = 0.0;
    for (std::size_t b = 0; b < k; ++b) spline += coeffs[b] * basis.values[b];
    const std::size_t e = out * edges + edge;
    return params.get("edge_scale").value[e] * (params.get("base_weight").value[e] * silu(u) + spline);
}

// Effective weight for (output j, edge q, slot s) where slots 0..K-1 are spline
// coefficients and slot K is the silu base term.
template <typename Index>
RowMatrix effective_weights(const LayerParams& params, std::size_t out, std::size_t edges, std::size_t k,
                            std::size_t cols, Index column_of) {
    const auto& coeffs = params.get("spline_coeffs").value;
    const auto& base = params.get("base_weight").value;
    const auto& scale = params.get("edge_scale").value;
    RowMatrix w(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(cols));
    for (std::size_t j = 0; j < out; ++j)
        for (std::size_t q = 0; q < edges; ++q) {
            const std::size_t e = j * edges + q;
            for (std::size_t s = 0; s < k; ++s) w(j, column_of(q, s)) = scale[e] * coeffs[e * k + s];
            w(j, column_of(q, k)) = scale[e] * base[e];
        }
    return w;
}

template <typename Index>
void scatter_weight_grads(LayerParams& params, const RowMatrix& dw, std::size_t out, std::size_t edges, std::size_t k,
                          Index column_of) {
    auto& coeffs = params.get("spline_coeffs");
    auto& base = params.get("base_weight");
    auto& scale = params.get("edge_scale");
    for (std::size_t j = 0; j < out; ++j)
        for (std::size_t q = 0; q < edges; ++q) {
            const std::size_t e = j * edges + q;
            const double a = scale.value[e];
            double da = 0.0;
            for (std::size_t s = 0; s < k; ++s) {
                const double g = dw(j, column_of(q, s));
                coeffs.grad[e * k + s] += a * g;
                da += coeffs.value[e * k + s] * g;
            }
            const double g = dw(j, column_of(q, k));
            base.grad[e] += a * g;
            da += base.value[e] * g;
            scale.grad[e] += da;
        }
}

}  // namespace

// ---------------------------------------------------------------- KanLinear

KanLinear::KanLinear(std::size_t in_dim, std::size_t out_dim, const SplineGrid& grid, Rng& rng)
    : in_(in_dim), out_(out_dim), grid_(grid) {
    require(in_dim >= 1 && out_dim >= 1, ErrorKind::InvalidSize, "kan layer dimensions must be positive");
    add_edge_params(params_, out_, in_, grid_, glorot_bound(in_, out_), rng);
}

Shape KanLinear::output_shape(const Shape& input) const {
    require(input.size() == 2 && input[1] == in_, ErrorKind::ShapeMismatch,
            "kan layer expects (batch, " + std::to_string(in_) + "), got " + shape_string(input));
    return {input[0], out_};
}

double KanLinear::edge(std::size_t i, std::size_t j, double u) const {
    require(i < in_ && j < out_, ErrorKind::IndexOutOfRange, "kan edge index out of range");
    return edge_value(params_, grid_, in_, i, j, u);
}

Tensor KanLinear::forward(const Tensor& x) {
    const Shape out_shape = output_shape(x.shape());
    const std::size_t batch = x.dim(0);
    const std::size_t k = grid_.basis_count();
    const std::size_t width = in_ * (k + 1);

    features_ = Tensor({batch, width});
    slopes_ = Tensor({batch, width});
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t i = 0; i < in_; ++i) {
            const std::size_t at = b * width + i * (k + 1);
            expand_value(grid_, x[b * in_ + i], features_.data() + at, slopes_.data() + at);
        }

    auto column_of = [k](std::size_t q, std::size_t s) { return static_cast<Eigen::Index>(q * (k + 1) + s); };
    const RowMatrix w = effective_weights(params_, out_, in_, k, width, column_of);
    Tensor out(out_shape);
    as_matrix(out, batch, out_).noalias() = as_matrix(std::as_const(features_), batch, width) * w.transpose();
    cached_ = true;
    return out;
}

Tensor KanLinear::backward(const Tensor& grad_out) {
    require(cached_, ErrorKind::NoCachedForward, "kan layer backward called before forward");
    const std::size_t batch = features_.dim(0);
    expect_shape(grad_out, {batch, out_}, "kan layer grad_out");
    const std::size_t k = grid_.basis_count();
    const std::size_t width = in_ * (k + 1);

    auto column_of = [k](std::size_t q, std::size_t s) { return static_cast<Eigen::Index>(q * (k + 1) + s); };
    const RowMatrix w = effective_weights(params_, out_, in_, k, width, column_of);
    const auto g = as_matrix(grad_out, batch, out_);
    const RowMatrix dw = g.transpose() * as_matrix(std::as_const(features_), batch, width);
    scatter_weight_grads(params_, dw, out_, in_, k, column_of);

    const RowMatrix dfeatures = g * w;
    Tensor grad_in({batch, in_});
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t i = 0; i < in_; ++i) {
            double sum = 0.0;
            for (std::size_t s = 0; s <= k; ++s) {
                const auto col = static_cast<Eigen::Index>(i * (k + 1) + s);
                sum += dfeatures(static_cast<Eigen::Index>(b), col) * slopes_[b * width + col];
            }
            grad_in[b * in_ + i] = sum;
        }
    return grad_in;
}

// ---------------------------------------------------------------- ConvKan

ConvKan::ConvKan(const ConvKanOptions& options, const SplineGrid& grid, Rng& rng) : opt_(options), grid_(grid) {
    require(opt_.channels_in >= 1 && opt_.channels_out >= 1 && opt_.kernel_h >= 1 && opt_.kernel_w >= 1,
            ErrorKind::InvalidSize, "conv-kan dimensions must be positive");
    const std::size_t taps = opt_.kernel_h * opt_.kernel_w;
    add_edge_params(params_, opt_.channels_out, opt_.channels_in * taps, grid_,
                    glorot_bound(opt_.channels_in * taps, opt_.channels_out * taps), rng);
}

Shape ConvKan::output_shape(const Shape& input) const {
    require(input.size() == 4 && input[1] == opt_.channels_in, ErrorKind::ShapeMismatch,
            "conv-kan expects (batch, " + std::to_string(opt_.channels_in) + ", H, W), got " + shape_string(input));
    const std::size_t h = input[2] + 2 * opt_.padding;
    const std::size_t w = input[3] + 2 * opt_.padding;
    require(h >= opt_.kernel_h && w >= opt_.kernel_w, ErrorKind::KernelLargerThanInput,
            "kernel exceeds padded input " + shape_string(input));
    return {input[0], opt_.channels_out, h - opt_.kernel_h + 1, w - opt_.kernel_w + 1};
}

double ConvKan::edge(std::size_t o, std::size_t c, std::size_t m, std::size_t n, double u) const {
    require(o < opt_.channels_out && c < opt_.channels_in && m < opt_.kernel_h && n < opt_.kernel_w,
            ErrorKind::IndexOutOfRange, "conv-kan edge index out of range");
    const std::size_t edges = opt_.channels_in * opt_.kernel_h * opt_.kernel_w;
    return edge_value(params_, grid_, edges, (c * opt_.kernel_h + m) * opt_.kernel_w + n, o, u);
}

Tensor ConvKan::forward(const Tensor& x) {
    const Shape out_shape = output_shape(x.shape());
    const std::size_t batch = x.dim(0), ch = x.dim(1), height = x.dim(2), width = x.dim(3);
    const std::size_t k = grid_.basis_count();
    const std::size_t slots = k + 1;
    const std::size_t plane = height * width;

    // Each input pixel expands into `slots` channels; the conv then mixes them linearly.
    features_ = Tensor({batch, ch * slots, height, width});
    slopes_ = Tensor({batch, ch * slots, height, width});
    std::vector<double> feat(slots), slope(slots);
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t c = 0; c < ch; ++c)
            for (std::size_t p = 0; p < plane; ++p) {
                expand_value(grid_, x[(b * ch + c) * plane + p], feat.data(), slope.data());
                for (std::size_t s = 0; s < slots; ++s) {
                    const std::size_t at = ((b * ch + c) * slots + s) * plane + p;
                    features_[at] = feat[s];
                    slopes_[at] = slope[s];
                }
            }

    const std::size_t kh = opt_.kernel_h, kw = opt_.kernel_w, taps = kh * kw;
    const std::size_t edges = ch * taps;
    auto column_of = [=](std::size_t q, std::size_t s) {
        const std::size_t c = q / taps, tap = q % taps;
        return static_cast<Eigen::Index>((c * slots + s) * taps + tap);
    };
    const RowMatrix w = effective_weights(params_, opt_.channels_out, edges, k, edges * slots, column_of);
    const detail::ConvGeometry geom{batch, ch * slots, height, width, kh, kw, opt_.padding, out_shape[2], out_shape[3]};
    Tensor out(out_shape);
    detail::conv_forward(geom, features_.data(), w, out.data());
    input_shape_ = x.shape();
    cached_ = true;
    return out;
}

Tensor ConvKan::backward(const Tensor& grad_out) {
    require(cached_, ErrorKind::NoCachedForward, "conv-kan backward called before forward");
    const Shape out_shape = output_shape(input_shape_);
    expect_shape(grad_out, out_shape, "conv-kan grad_out");
    const std::size_t batch = input_shape_[0], ch = input_shape_[1], height = input_shape_[2], width = input_shape_[3];
    const std::size_t k = grid_.basis_count();
    const std::size_t slots = k + 1;
    const std::size_t plane = height * width;
    const std::size_t kh = opt_.kernel_h, kw = opt_.kernel_w, taps = kh * kw;
    const std::size_t edges = ch * taps;
    const std::size_t co = opt_.channels_out;

    auto column_of = [=](std::size_t q, std::size_t s) {
        const std::size_t c = q / taps, tap = q % taps;
        return static_cast<Eigen::Index>((c * slots + s) * taps + tap);
    };
    const RowMatrix w = effective_weights(params_, co, edges, k, edges * slots, column_of);
    const detail::ConvGeometry geom{batch, ch * slots, height, width, kh, kw, opt_.padding, out_shape[2], out_shape[3]};
    RowMatrix dw = RowMatrix::Zero(static_cast<Eigen::Index>(co), static_cast<Eigen::Index>(edges * slots));
    Tensor dfeatures(features_.shape());
    detail::conv_backward(geom, features_.data(), w, grad_out.data(), dw, dfeatures.data());
    scatter_weight_grads(params_, dw, co, edges, k, column_of);

    Tensor grad_in(input_shape_);
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t c = 0; c < ch; ++c)
            for (std::size_t s = 0; s < slots; ++s) {
                const std::size_t base = ((b * ch + c) * slots + s) * plane;
                double* dst = grad_in.data() + (b * ch + c) * plane;
                for (std::size_t p = 0; p < plane; ++p) dst[p] += dfeatures[base + p] * slopes_[base + p];
            }
    return grad_in;
}

}  // namespace kanids
