#include "kanids/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "conv_core.hpp"
#include "eigen_map.hpp"
#include "kanids/error.hpp"

namespace kanids {

using detail::as_matrix;
using detail::as_vector;
using detail::RowMatrix;

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

namespace {

double activate(Activation a, double x) {
    switch (a) {
        case Activation::Identity: return x;
        case Activation::Relu: return x > 0.0 ? x : 0.0;
        case Activation::Sigmoid: return sigmoid(x);
        case Activation::Tanh: return std::tanh(x);
    }
    return x;
}

// Derivative expressed through the activation output y.
double activation_slope(Activation a, double y) {
    switch (a) {
        case Activation::Identity: return 1.0;
        case Activation::Relu: return y > 0.0 ? 1.0 : 0.0;
        case Activation::Sigmoid: return y * (1.0 - y);
        case Activation::Tanh: return 1.0 - y * y;
    }
    return 1.0;
}

void apply_activation(Activation a, Tensor& t) {
    if (a == Activation::Identity) return;
    for (double& v : t.values()) v = activate(a, v);
}

}  // namespace

double glorot_bound(std::size_t fan_in, std::size_t fan_out) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

Tensor uniform_tensor(Shape shape, double bound, Rng& rng) {
    Tensor t(std::move(shape));
    for (double& v : t.values()) v = rng.uniform(-bound, bound);
    return t;
}

// ---------------------------------------------------------------- Dense

Dense::Dense(std::size_t in_dim, std::size_t out_dim, Activation activation, Rng& rng)
    : in_dim_(in_dim), out_dim_(out_dim), activation_(activation) {
    require(in_dim >= 1 && out_dim >= 1, ErrorKind::InvalidSize, "dense dimensions must be positive");
    params_.add("weight", uniform_tensor({in_dim, out_dim}, glorot_bound(in_dim, out_dim), rng));
    params_.add("bias", Tensor({out_dim}));
}

Shape Dense::output_shape(const Shape& input) const {
    require(input.size() == 2 && input[1] == in_dim_, ErrorKind::ShapeMismatch,
            "dense expects (batch, " + std::to_string(in_dim_) + "), got " + shape_string(input));
    return {input[0], out_dim_};
}

Tensor Dense::forward(const Tensor& x) {
    const Shape out_shape = output_shape(x.shape());
    const std::size_t batch = x.dim(0);
    const auto& w = params_.get("weight").value;
    const auto& b = params_.get("bias").value;

    Tensor out(out_shape);
    auto y = as_matrix(out, batch, out_dim_);
    y.noalias() = as_matrix(x, batch, in_dim_) * as_matrix(w, in_dim_, out_dim_);
    y.rowwise() += as_vector(b).transpose();
    apply_activation(activation_, out);

    input_ = x;
    output_ = out;
    return out;
}

Tensor Dense::backward(const Tensor& grad_out) {
    require(input_.has_value(), ErrorKind::NoCachedForward, "dense backward called before forward");
    expect_shape(grad_out, output_.shape(), "dense grad_out");
    const std::size_t batch = input_->dim(0);

    Tensor pre_grad = grad_out;
    if (activation_ != Activation::Identity)
        for (std::size_t k = 0; k < pre_grad.size(); ++k) pre_grad[k] *= activation_slope(activation_, output_[k]);

    auto& w = params_.get("weight");
    auto& b = params_.get("bias");
    const auto dpre = as_matrix(std::as_const(pre_grad), batch, out_dim_);
    as_matrix(w.grad, in_dim_, out_dim_).noalias() += as_matrix(*input_, batch, in_dim_).transpose() * dpre;
    as_vector(b.grad) += dpre.colwise().sum().transpose();

    Tensor grad_in({batch, in_dim_});
    as_matrix(grad_in, batch, in_dim_).noalias() = dpre * as_matrix(std::as_const(w.value), in_dim_, out_dim_).transpose();
    return grad_in;
}

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(const Conv2dOptions& options, Rng& rng) : opt_(options) {
    require(opt_.channels_in >= 1 && opt_.channels_out >= 1 && opt_.kernel_h >= 1 && opt_.kernel_w >= 1,
            ErrorKind::InvalidSize, "conv2d dimensions must be positive");
    const std::size_t taps = opt_.kernel_h * opt_.kernel_w;
    params_.add("kernel", uniform_tensor({opt_.channels_out, opt_.channels_in, opt_.kernel_h, opt_.kernel_w},
                                         glorot_bound(opt_.channels_in * taps, opt_.channels_out * taps), rng));
    params_.add("bias", Tensor({opt_.channels_out}));
}

Shape Conv2d::output_shape(const Shape& input) const {
    require(input.size() == 4 && input[1] == opt_.channels_in, ErrorKind::ShapeMismatch,
            "conv2d expects (batch, " + std::to_string(opt_.channels_in) + ", H, W), got " + shape_string(input));
    const std::size_t h = input[2] + 2 * opt_.padding;
    const std::size_t w = input[3] + 2 * opt_.padding;
    require(h >= opt_.kernel_h && w >= opt_.kernel_w, ErrorKind::KernelLargerThanInput,
            "kernel exceeds padded input " + shape_string(input));
    return {input[0], opt_.channels_out, h - opt_.kernel_h + 1, w - opt_.kernel_w + 1};
}

namespace {

detail::ConvGeometry geometry_for(const Shape& in, const Shape& out, std::size_t kh, std::size_t kw, std::size_t pad) {
    return detail::ConvGeometry{in[0], in[1], in[2], in[3], kh, kw, pad, out[2], out[3]};
}

}  // namespace

Tensor Conv2d::forward(const Tensor& x) {
    const Shape out_shape = output_shape(x.shape());
    const auto geom = geometry_for(x.shape(), out_shape, opt_.kernel_h, opt_.kernel_w, opt_.padding);
    const std::size_t co = opt_.channels_out;
    const RowMatrix kernel = as_matrix(params_.get("kernel").value, co, geom.patch());
    const auto& bias = params_.get("bias").value;

    Tensor out(out_shape);
    detail::conv_forward(geom, x.data(), kernel, out.data());
    const std::size_t plane = geom.plane();
    for (std::size_t b = 0; b < geom.batch; ++b)
        for (std::size_t o = 0; o < co; ++o) {
            double* y = out.data() + (b * co + o) * plane;
            for (std::size_t p = 0; p < plane; ++p) y[p] = activate(opt_.activation, y[p] + bias[o]);
        }

    input_ = x;
    output_ = out;
    cached_ = true;
    return out;
}

Tensor Conv2d::backward(const Tensor& grad_out) {
    require(cached_, ErrorKind::NoCachedForward, "conv2d backward called before forward");
    expect_shape(grad_out, output_.shape(), "conv2d grad_out");
    const auto geom = geometry_for(input_.shape(), output_.shape(), opt_.kernel_h, opt_.kernel_w, opt_.padding);
    const std::size_t co = opt_.channels_out;
    const std::size_t plane = geom.plane();

    Tensor pre_grad = grad_out;
    if (opt_.activation != Activation::Identity)
        for (std::size_t k = 0; k < pre_grad.size(); ++k) pre_grad[k] *= activation_slope(opt_.activation, output_[k]);

    auto& kernel = params_.get("kernel");
    auto& bias = params_.get("bias");
    for (std::size_t b = 0; b < geom.batch; ++b)
        for (std::size_t o = 0; o < co; ++o) {
            const double* d = pre_grad.data() + (b * co + o) * plane;
            double sum = 0.0;
            for (std::size_t p = 0; p < plane; ++p) sum += d[p];
            bias.grad[o] += sum;
        }

    const RowMatrix weights = as_matrix(std::as_const(kernel.value), co, geom.patch());
    RowMatrix dkernel = RowMatrix::Zero(static_cast<Eigen::Index>(co), static_cast<Eigen::Index>(geom.patch()));
    Tensor grad_in(input_.shape());
    detail::conv_backward(geom, input_.data(), weights, pre_grad.data(), dkernel, grad_in.data());
    as_matrix(kernel.grad, co, geom.patch()) += dkernel;
    return grad_in;
}

// ---------------------------------------------------------------- MaxPool2d

MaxPool2d::MaxPool2d(std::size_t window) : window_(window) {
    require(window >= 1, ErrorKind::InvalidSize, "pool window must be positive");
}

Shape MaxPool2d::output_shape(const Shape& input) const {
    require(input.size() == 4, ErrorKind::ShapeMismatch, "maxpool2d expects rank-4 input, got " + shape_string(input));
    return {input[0], input[1], (input[2] + window_ - 1) / window_, (input[3] + window_ - 1) / window_};
}

Tensor MaxPool2d::forward(const Tensor& x) {
    const Shape out_shape = output_shape(x.shape());
    const std::size_t height = x.dim(2), width = x.dim(3);
    const std::size_t out_h = out_shape[2], out_w = out_shape[3];
    const std::size_t planes = x.dim(0) * x.dim(1);

    Tensor out(out_shape);
    argmax_.assign(out.size(), 0);
    for (std::size_t pl = 0; pl < planes; ++pl)
        for (std::size_t oi = 0; oi < out_h; ++oi)
            for (std::size_t oj = 0; oj < out_w; ++oj) {
                double best = -std::numeric_limits<double>::infinity();
                std::size_t best_at = pl * height * width + oi * window_ * width + oj * window_;
                for (std::size_t i = oi * window_; i < std::min(height, oi * window_ + window_); ++i)
                    for (std::size_t j = oj * window_; j < std::min(width, oj * window_ + window_); ++j) {
                        const std::size_t at = (pl * height + i) * width + j;
                        if (x[at] > best) {
                            best = x[at];
                            best_at = at;
                        }
                    }
                const std::size_t o = (pl * out_h + oi) * out_w + oj;
                out[o] = best;
                argmax_[o] = best_at;
            }
    input_shape_ = x.shape();
    cached_ = true;
    return out;
}

Tensor MaxPool2d::backward(const Tensor& grad_out) {
    require(cached_, ErrorKind::NoCachedForward, "maxpool2d backward called before forward");
    require(grad_out.size() == argmax_.size(), ErrorKind::ShapeMismatch, "maxpool2d grad_out size mismatch");
    Tensor grad_in(input_shape_);
    for (std::size_t o = 0; o < argmax_.size(); ++o) grad_in[argmax_[o]] += grad_out[o];
    return grad_in;
}

// ---------------------------------------------------------------- reshapes

Shape Flatten::output_shape(const Shape& input) const {
    require(!input.empty(), ErrorKind::ShapeMismatch, "flatten needs a batch axis");
    return {input[0], shape_size(input) / std::max<std::size_t>(input[0], 1)};
}

Tensor Flatten::forward(const Tensor& x) {
    input_shape_ = x.shape();
    return x.reshaped(output_shape(x.shape()));
}

Tensor Flatten::backward(const Tensor& grad_out) {
    require(!input_shape_.empty(), ErrorKind::NoCachedForward, "flatten backward called before forward");
    return grad_out.reshaped(input_shape_);
}

SquareReshape::SquareReshape(std::size_t features) : features_(features) {
    require(features >= 1, ErrorKind::InvalidSize, "square reshape needs at least one feature");
    side_ = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(features))));
    while (side_ * side_ < features) ++side_;
    while (side_ > 1 && (side_ - 1) * (side_ - 1) >= features) --side_;
}

Shape SquareReshape::output_shape(const Shape& input) const {
    require(input.size() == 2 && input[1] == features_, ErrorKind::ShapeMismatch,
            "square reshape expects (batch, " + std::to_string(features_) + "), got " + shape_string(input));
    return {input[0], 1, side_, side_};
}

Tensor SquareReshape::forward(const Tensor& x) {
    Tensor out(output_shape(x.shape()));
    const std::size_t cells = side_ * side_;
    for (std::size_t b = 0; b < x.dim(0); ++b)
        std::copy_n(x.data() + b * features_, features_, out.data() + b * cells);
    return out;
}

Tensor SquareReshape::backward(const Tensor& grad_out) {
    const std::size_t cells = side_ * side_;
    require(grad_out.rank() == 4 && grad_out.size() == grad_out.dim(0) * cells, ErrorKind::ShapeMismatch,
            "square reshape grad_out has wrong shape");
    Tensor grad_in({grad_out.dim(0), features_});
    for (std::size_t b = 0; b < grad_out.dim(0); ++b)
        std::copy_n(grad_out.data() + b * cells, features_, grad_in.data() + b * features_);
    return grad_in;
}

Shape RowsAsSequence::output_shape(const Shape& input) const {
    require(input.size() == 4, ErrorKind::ShapeMismatch, "rows-as-sequence expects rank-4 input");
    return {input[0], input[2], input[1] * input[3]};
}

Tensor RowsAsSequence::forward(const Tensor& x) {
    Tensor out(output_shape(x.shape()));
    const std::size_t batch = x.dim(0), ch = x.dim(1), height = x.dim(2), width = x.dim(3);
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t c = 0; c < ch; ++c)
            for (std::size_t t = 0; t < height; ++t)
                std::copy_n(x.data() + ((b * ch + c) * height + t) * width, width,
                            out.data() + (b * height + t) * ch * width + c * width);
    input_shape_ = x.shape();
    return out;
}

Tensor RowsAsSequence::backward(const Tensor& grad_out) {
    require(!input_shape_.empty(), ErrorKind::NoCachedForward, "rows-as-sequence backward called before forward");
    expect_shape(grad_out, output_shape(input_shape_), "rows-as-sequence grad_out");
    Tensor grad_in(input_shape_);
    const std::size_t batch = input_shape_[0], ch = input_shape_[1], height = input_shape_[2], width = input_shape_[3];
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t c = 0; c < ch; ++c)
            for (std::size_t t = 0; t < height; ++t)
                std::copy_n(grad_out.data() + (b * height + t) * ch * width + c * width, width,
                            grad_in.data() + ((b * ch + c) * height + t) * width);
    return grad_in;
}

// ---------------------------------------------------------------- Lstm

namespace {

constexpr const char* kGateWeights[4] = {"W_f", "W_i", "W_o", "W_c"};
constexpr const char* kGateBiases[4] = {"b_f", "b_i", "b_o", "b_c"};

}  // namespace

Lstm::Lstm(std::size_t in_dim, std::size_t hidden_dim, Rng& rng) : in_dim_(in_dim), hidden_(hidden_dim) {
    require(in_dim >= 1 && hidden_dim >= 1, ErrorKind::InvalidSize, "lstm dimensions must be positive");
    const double bound = glorot_bound(hidden_ + in_dim_, hidden_);
    for (int g = 0; g < 4; ++g) {
        params_.add(kGateWeights[g], uniform_tensor({hidden_, hidden_ + in_dim_}, bound, rng));
        params_.add(kGateBiases[g], Tensor({hidden_}, g == 0 ? 1.0 : 0.0));
    }
}

Shape Lstm::output_shape(const Shape& input) const {
    require(input.size() == 3 && input[2] == in_dim_, ErrorKind::ShapeMismatch,
            "lstm expects (batch, T, " + std::to_string(in_dim_) + "), got " + shape_string(input));
    require(input[1] >= 1, ErrorKind::EmptySequence, "lstm sequence has no timesteps");
    return {input[0], hidden_};
}

LstmState Lstm::zero_state(std::size_t batch) const {
    return LstmState{Tensor({batch, hidden_}), Tensor({batch, hidden_})};
}

LstmState Lstm::step(const LstmState& state, const Tensor& z) {
    expect_rank(z, 2, "lstm step input");
    const std::size_t batch = z.dim(0);
    require(z.dim(1) == in_dim_, ErrorKind::ShapeMismatch, "lstm step input width mismatch");
    expect_shape(state.hidden, {batch, hidden_}, "lstm hidden state");
    expect_shape(state.cell, {batch, hidden_}, "lstm cell state");

    const std::size_t width = hidden_ + in_dim_;
    StepCache cache;
    cache.joined = Tensor({batch, width});
    auto joined = as_matrix(cache.joined, batch, width);
    joined.leftCols(static_cast<Eigen::Index>(hidden_)) = as_matrix(state.hidden, batch, hidden_);
    joined.rightCols(static_cast<Eigen::Index>(in_dim_)) = as_matrix(z, batch, in_dim_);

    Tensor* gates[4] = {&cache.forget, &cache.input, &cache.output, &cache.candidate};
    for (int g = 0; g < 4; ++g) {
        *gates[g] = Tensor({batch, hidden_});
        auto pre = as_matrix(*gates[g], batch, hidden_);
        pre.noalias() = joined * as_matrix(params_.get(kGateWeights[g]).value, hidden_, width).transpose();
        pre.rowwise() += as_vector(params_.get(kGateBiases[g]).value).transpose();
        apply_activation(g == 3 ? Activation::Tanh : Activation::Sigmoid, *gates[g]);
    }

    LstmState next{Tensor({batch, hidden_}), Tensor({batch, hidden_})};
    cache.cell_prev = state.cell;
    cache.cell_tanh = Tensor({batch, hidden_});
    for (std::size_t k = 0; k < batch * hidden_; ++k) {
        next.cell[k] = cache.forget[k] * state.cell[k] + cache.input[k] * cache.candidate[k];
        cache.cell_tanh[k] = std::tanh(next.cell[k]);
        next.hidden[k] = cache.output[k] * cache.cell_tanh[k];
    }
    steps_.push_back(std::move(cache));
    return next;
}

Tensor Lstm::forward(const Tensor& xs) {
    output_shape(xs.shape());
    const std::size_t batch = xs.dim(0), steps = xs.dim(1);
    steps_.clear();
    LstmState state = zero_state(batch);
    Tensor z({batch, in_dim_});
    for (std::size_t t = 0; t < steps; ++t) {
        for (std::size_t b = 0; b < batch; ++b)
            std::copy_n(xs.data() + (b * steps + t) * in_dim_, in_dim_, z.data() + b * in_dim_);
        state = step(state, z);
    }
    return state.hidden;
}

Tensor Lstm::backward(const Tensor& grad_out) {
    require(!steps_.empty(), ErrorKind::NoCachedForward, "lstm backward called before forward");
    const std::size_t batch = steps_.front().joined.dim(0);
    const std::size_t steps = steps_.size();
    const std::size_t width = hidden_ + in_dim_;
    const std::size_t n = batch * hidden_;
    expect_shape(grad_out, {batch, hidden_}, "lstm grad_out");

    Tensor grad_in({batch, steps, in_dim_});
    std::vector<double> dh(grad_out.values().begin(), grad_out.values().end());
    std::vector<double> dc(n, 0.0);
    Tensor dpre[4] = {Tensor({batch, hidden_}), Tensor({batch, hidden_}), Tensor({batch, hidden_}),
                      Tensor({batch, hidden_})};
    RowMatrix djoined(batch, width);

    for (std::size_t t = steps; t-- > 0;) {
        const StepCache& s = steps_[t];
        for (std::size_t k = 0; k < n; ++k) {
            const double f = s.forget[k], i = s.input[k], o = s.output[k], cand = s.candidate[k];
            const double tc = s.cell_tanh[k];
            dc[k] += dh[k] * o * (1.0 - tc * tc);
            dpre[0][k] = dc[k] * s.cell_prev[k] * f * (1.0 - f);
            dpre[1][k] = dc[k] * cand * i * (1.0 - i);
            dpre[2][k] = dh[k] * tc * o * (1.0 - o);
            dpre[3][k] = dc[k] * i * (1.0 - cand * cand);
            dc[k] *= f;
        }
        djoined.setZero();
        const auto joined = as_matrix(s.joined, batch, width);
        for (int g = 0; g < 4; ++g) {
            auto& w = params_.get(kGateWeights[g]);
            const auto d = as_matrix(std::as_const(dpre[g]), batch, hidden_);
            as_matrix(w.grad, hidden_, width).noalias() += d.transpose() * joined;
            as_vector(params_.get(kGateBiases[g]).grad) += d.colwise().sum().transpose();
            djoined.noalias() += d * as_matrix(std::as_const(w.value), hidden_, width);
        }
        for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t h = 0; h < hidden_; ++h) dh[b * hidden_ + h] = djoined(static_cast<Eigen::Index>(b), h);
            for (std::size_t c = 0; c < in_dim_; ++c)
                grad_in[(b * steps + t) * in_dim_ + c] = djoined(static_cast<Eigen::Index>(b), hidden_ + c);
        }
    }
    return grad_in;
}

}  // namespace kanids
