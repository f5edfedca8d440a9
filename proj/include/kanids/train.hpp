#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kanids/data.hpp"
#include "kanids/metrics.hpp"
#include "kanids/models.hpp"
#include "kanids/tensor.hpp"

namespace kanids {

struct TrainConfig {
    double learning_rate = 2e-5;
    std::size_t epochs = 30;
    std::size_t batch_size = 256;
    double weight_decay = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t seed = 1;
    double prob_clamp = 1e-7;
    double clip_norm = 0.0;  // 0 disables clipping

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// learning_rate may be 0 (a frozen run); everything else follows the documented ranges.
void validate(const TrainConfig& config);

/// Mean binary cross-entropy of probabilities clamped to [clamp, 1 - clamp].
double bce_loss(std::span<const double> probs, std::span<const std::uint8_t> labels, double clamp = 1e-7);

struct LossAndGrad {
    double loss = 0.0;
    Tensor grad;  // d loss / d logit = (sigmoid(logit) - y) / N
};

/// BCE on sigmoid(logits) together with its fused logit-space gradient.
LossAndGrad bce_with_logits(const Tensor& logits, std::span<const std::uint8_t> labels, double clamp = 1e-7);

/// Decoupled weight decay Adam. Moment buffers are keyed by position in the
/// parameter list, so the same list order must be passed on every step.
class AdamW {
public:
    explicit AdamW(const TrainConfig& config) : config_(config) {}

    /// Applies one update and zeroes the gradients. Throws non-finite-gradient.
    void step(const std::vector<NamedParameter>& params);
    std::size_t step_count() const noexcept { return steps_; }

private:
    TrainConfig config_;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
    std::size_t steps_ = 0;
};

/// Rescales all gradients so their joint L2 norm is at most max_norm; returns true if clipped.
bool clip_gradients(const std::vector<NamedParameter>& params, double max_norm);

struct EpochLog {
    std::size_t epoch = 0;
    double loss = 0.0;
    double train_accuracy = 0.0;  // from the forward passes of the epoch
};

struct RunReport {
    std::string model;
    std::string dataset;
    std::string data_fingerprint;
    ModelSpec spec;
    TrainConfig config;
    std::vector<double> epoch_losses;
    std::vector<double> epoch_train_accuracy;
    Confusion confusion;
    Metrics metrics;
    Metrics macro;
    std::size_t parameter_count = 0;
    std::size_t clipped_steps = 0;
    double runtime_seconds = 0.0;
    bool diverged = false;
    std::string error;
};

/// Order in which the rows of an epoch are visited; a pure function of (seed, epoch).
std::vector<std::size_t> epoch_order(std::size_t rows, std::uint64_t seed, std::size_t epoch);

/// Copies the given rows of a split into a (rows.size(), dim) batch.
Tensor gather_rows(const DatasetSplit& split, std::span<const std::size_t> rows);

Confusion evaluate(Model& model, const DatasetSplit& split, std::size_t batch_size = 256, double threshold = 0.5);

/// Called after every epoch; returning false ends training early.
using EpochCallback = std::function<bool(const EpochLog&)>;

/// Trains with shuffled mini-batches (last partial batch kept), then evaluates
/// on `test`. Throws empty-batch, schema-mismatch, divergence.
RunReport train_model(Model& model, const DatasetSplit& train, const DatasetSplit& test, const TrainConfig& config,
                      const EpochCallback& on_epoch = {});

}  // namespace kanids
