#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kanids/params.hpp"
#include "kanids/rng.hpp"
#include "kanids/tensor.hpp"

namespace kanids {

enum class Activation { Identity, Relu, Sigmoid, Tanh };

double sigmoid(double x);

/// A differentiable stage with an explicit backward pass. forward() caches
/// whatever backward() needs; backward() accumulates parameter gradients and
/// returns the gradient with respect to the forward input.
class Layer {
public:
    virtual ~Layer() = default;

    virtual std::string kind() const = 0;
    /// Output shape for a given input shape; throws shape-mismatch for invalid inputs.
    virtual Shape output_shape(const Shape& input) const = 0;
    virtual Tensor forward(const Tensor& x) = 0;
    virtual Tensor backward(const Tensor& grad_out) = 0;

    virtual LayerParams* params() { return nullptr; }
    const LayerParams* params() const { return const_cast<Layer*>(this)->params(); }
};

class Dense final : public Layer {
public:
    Dense(std::size_t in_dim, std::size_t out_dim, Activation activation, Rng& rng);

    std::string kind() const override { return "dense"; }
    Shape output_shape(const Shape& input) const override;
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& grad_out) override;
    LayerParams* params() override { return &params_; }

    std::size_t in_dim() const noexcept { return in_dim_; }
    std::size_t out_dim() const noexcept { return out_dim_; }

private:
    std::size_t in_dim_;
    std::size_t out_dim_;
    Activation activation_;
    LayerParams params_;
    std::optional<Tensor> input_;
    Tensor output_;
};

struct Conv2dOptions {
    std::size_t channels_in = 1;
    std::size_t channels_out = 1;
    std::size_t kernel_h = 3;
    std::size_t kernel_w = 3;
    std::size_t padding = 0;
    Activation activation = Activation::Relu;
};

/// Stride-1 cross-correlation over (batch, channels, H, W) with symmetric zero padding.
class Conv2d final : public Layer {
public:
    Conv2d(const Conv2dOptions& options, Rng& rng);

    std::string kind() const override { return "conv2d"; }
    Shape output_shape(const Shape& input) const override;
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& grad_out) override;
    LayerParams* params() override { return &params_; }

private:
    Conv2dOptions opt_;
    LayerParams params_;
    Tensor input_;
    Tensor output_;
    bool cached_ = false;
};

/// Non-overlapping max pooling; ragged edges behave as if padded with -inf.
/// Gradient goes to the first maximal element of each window.
class MaxPool2d final : public Layer {
public:
    explicit MaxPool2d(std::size_t window);

    std::string kind() const override { return "maxpool2d"; }
    Shape output_shape(const Shape& input) const override;
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& grad_out) override;

private:
    std::size_t window_;
    Shape input_shape_;
    std::vector<std::size_t> argmax_;
    bool cached_ = false;
};

/// (batch, ...) -> (batch, product(...)).
class Flatten final : public Layer {
public:
    std::string kind() const override { return "flatten"; }
    Shape output_shape(const Shape& input) const override;
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& grad_out) override;

private:
    Shape input_shape_;
};

/// (batch, n) -> (batch, 1, S, S) with S = ceil(sqrt(n)), zero padded row-major.
class SquareReshape final : public Layer {
public:
    explicit SquareReshape(std::size_t features);

    std::string kind() const override { return "square_reshape"; }
    Shape output_shape(const Shape& input) const override;
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& grad_out) override;

    std::size_t side() const noexcept { return side_; }

private:
    std::size_t features_;
    std::size_t side_;
};

/// (batch, C, H, W) -> (batch, H, C*W): each row of the feature map is one timestep.
class RowsAsSequence final : public Layer {
public:
    std::string kind() const override { return "rows_as_sequence"; }
    Shape output_shape(const Shape& input) const override;
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& grad_out) override;

private:
    Shape input_shape_;
};

struct LstmState {
    Tensor hidden;
    Tensor cell;
};

/// Single-layer unidirectional LSTM. Each gate has one weight matrix acting
/// on the concatenation [h_{t-1}, z_t]. forward() consumes (batch, T, in_dim)
/// from a zero state and returns the final hidden state.
class Lstm final : public Layer {
public:
    Lstm(std::size_t in_dim, std::size_t hidden_dim, Rng& rng);

    std::string kind() const override { return "lstm"; }
    Shape output_shape(const Shape& input) const override;
    Tensor forward(const Tensor& xs) override;
    Tensor backward(const Tensor& grad_out) override;
    LayerParams* params() override { return &params_; }

    LstmState zero_state(std::size_t batch) const;
    /// One recurrence step; appends the step's intermediates to the cache used by backward().
    LstmState step(const LstmState& state, const Tensor& z);
    void reset_cache() { steps_.clear(); }

    std::size_t in_dim() const noexcept { return in_dim_; }
    std::size_t hidden_dim() const noexcept { return hidden_; }

private:
    struct StepCache {
        Tensor joined;  // [h_{t-1}, z_t], (batch, hidden + in)
        Tensor forget, input, output, candidate;
        Tensor cell_prev, cell_tanh;
    };

    std::size_t in_dim_;
    std::size_t hidden_;
    LayerParams params_;
    std::vector<StepCache> steps_;
};

/// Xavier/Glorot uniform bound sqrt(6 / (fan_in + fan_out)).
double glorot_bound(std::size_t fan_in, std::size_t fan_out);
Tensor uniform_tensor(Shape shape, double bound, Rng& rng);

}  // namespace kanids
