#pragma once

#include <functional>
#include <vector>

#include "kanids/layers.hpp"
#include "kanids/spline.hpp"

namespace kanids {

double silu(double x);
double silu_grad(double x);


/// Dense KAN layer: every (input i, output j) edge carries its own learnable
/// function a_ji * (base_ji * silu(u) + spline_ji(u)).
class KanLinear final : public Layer {
public:
    KanLinear(std::size_t in_dim, std::size_t out_dim, const SplineGrid& grid, Rng& rng);

    std::string kind() const override { return "kan_linear"; }
    Shape output_shape(const Shape& input) const override;
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& grad_out) override;
    LayerParams* params() override { return &params_; }

    /// Value of the edge from input i to output j at u.
    double edge(std::size_t i, std::size_t j, double u) const;

    std::size_t in_dim() const noexcept { return in_; }
    std::size_t out_dim() const noexcept { return out_; }
    const SplineGrid& grid() const noexcept { return grid_; }

private:
    std::size_t in_;
    std::size_t out_;
    SplineGrid grid_;
    LayerParams params_;
    // Per input value: K basis values followed by silu, and their derivatives.
    Tensor features_;  // (batch, in * (K + 1))
    Tensor slopes_;    // (batch, in * (K + 1))
    bool cached_ = false;
};

struct ConvKanOptions {
    std::size_t channels_in = 1;
    std::size_t channels_out = 1;
    std::size_t kernel_h = 3;
    std::size_t kernel_w = 3;
    std::size_t padding = 0;
};

/// Convolution whose per-tap multiply is replaced by a learnable edge function:
///   out[b,o,i,j] = sum_{c,m,n} phi_{o,c,m,n}(x[b,c,i+m-p,j+n-p]).
/// Taps that fall into the zero padding contribute nothing.
class ConvKan final : public Layer {
public:
    ConvKan(const ConvKanOptions& options, const SplineGrid& grid, Rng& rng);

    std::string kind() const override { return "conv_kan"; }
    Shape output_shape(const Shape& input) const override;
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& grad_out) override;
    LayerParams* params() override { return &params_; }

    /// Edge function for output channel o, input channel c, kernel tap (m, n).
    double edge(std::size_t o, std::size_t c, std::size_t m, std::size_t n, double u) const;

private:
    ConvKanOptions opt_;
    SplineGrid grid_;
    LayerParams params_;
    Shape input_shape_;
    Tensor features_;  // (batch, C_in * (K + 1), H, W)
    Tensor slopes_;
    bool cached_ = false;
};

struct SmoothFitOptions {
    std::size_t samples = 201;
    std::size_t steps = 3000;
    double learning_rate = 1e-2;
    int degree = 3;
    std::uint64_t seed = 7;
};

/// Fits a 1 -> 1 KAN to `target` on [-1, 1] for each grid size with the same
/// seed and step budget; returns the final mean-squared training loss per grid size.
std::vector<double> fit_smooth_1d(const std::function<double(double)>& target, const std::vector<int>& grid_sizes,
                                  const SmoothFitOptions& options = {});

}  // namespace kanids
