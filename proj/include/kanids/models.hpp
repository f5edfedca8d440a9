#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "kanids/layers.hpp"
#include "kanids/tensor.hpp"

namespace kanids {

enum class ModelKind { CNN, LSTM, MLP2, MLP5, KAN2, KAN5, ConvKAN, KAN_LSTM };

inline constexpr ModelKind kAllModelKinds[] = {ModelKind::CNN,  ModelKind::LSTM, ModelKind::MLP2,    ModelKind::MLP5,
                                               ModelKind::KAN2, ModelKind::KAN5, ModelKind::ConvKAN, ModelKind::KAN_LSTM};

/// Enum token, e.g. "KAN_LSTM".
std::string_view to_token(ModelKind kind);
/// Results-table name, e.g. "KAN-LSTM", "KANs(2)", "MLP(5)".
std::string_view display_name(ModelKind kind);
/// Accepts either the token or the display name, case-insensitively.
ModelKind parse_model_kind(std::string_view text);

struct ModelSpec {
    ModelKind kind = ModelKind::MLP2;
    std::size_t input_dim = 1;
    std::size_t hidden_width = 64;
    int grid_size = 5;
    int spline_degree = 3;
    double grid_lo = -1.0;
    double grid_hi = 1.0;
    std::uint64_t seed = 1;
    std::size_t lstm_hidden = 64;
    std::vector<std::size_t> cnn_channels = {16, 32, 32};
    std::vector<std::size_t> convkan_channels = {8, 16, 16};

    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

void validate(const ModelSpec& spec);

struct NamedParameter {
    std::string name;  // "<layer index>.<layer kind>.<parameter>"
    Parameter* param;
};

/// A stack of layers mapping (batch, input_dim) to (batch, 1) logits.
class Model {
public:
    explicit Model(ModelSpec spec);
    Model(const Model&) = delete;
    Model& operator=(const Model&) = delete;
    Model(Model&&) noexcept = default;
    Model& operator=(Model&&) noexcept = default;

    const ModelSpec& spec() const noexcept { return spec_; }
    std::string name() const { return std::string(display_name(spec_.kind)); }

    /// Throws non-finite-logit if any output is NaN or infinite.
    Tensor forward(const Tensor& batch);
    /// Gradient of the loss w.r.t. the logits; accumulates into every parameter's grad.
    void backward(const Tensor& grad_logits);
    /// sigmoid(logit) >= threshold -> 1.
    std::vector<std::uint8_t> predict(const Tensor& batch, double threshold = 0.5);

    std::vector<NamedParameter> parameters();
    std::size_t parameter_count() const;
    void zero_grad();

    std::vector<double> flat_parameters() const;
    void load_flat_parameters(const std::vector<double>& values);

    std::vector<std::unique_ptr<Layer>>& layers() noexcept { return layers_; }
    /// Layer kinds in order, for structural checks.
    std::vector<std::string> layer_kinds() const;

private:
    ModelSpec spec_;
    std::vector<std::unique_ptr<Layer>> layers_;
};

/// Builds the architecture for spec.kind with parameters drawn from spec.seed.
Model build(const ModelSpec& spec);

std::vector<std::uint8_t> labels_from_logits(const Tensor& logits, double threshold = 0.5);

/// Binary parameter file: "KANIDSM1", u64 header length, JSON header (spec and
/// parameter manifest), then little-endian float64 values in manifest order.
void save_model(Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace kanids
