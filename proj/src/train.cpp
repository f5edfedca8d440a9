#include "kanids/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "kanids/error.hpp"
#include "kanids/layers.hpp"
#include "kanids/rng.hpp"

namespace kanids {

void validate(const TrainConfig& c) {
    require(c.learning_rate >= 0.0 && std::isfinite(c.learning_rate), ErrorKind::ConfigParse,
            "learning_rate must be finite and non-negative");
    require(c.epochs >= 1, ErrorKind::ConfigParse, "epochs must be at least 1");
    require(c.batch_size >= 1, ErrorKind::ConfigParse, "batch_size must be at least 1");
    require(c.weight_decay >= 0.0, ErrorKind::ConfigParse, "weight_decay must be non-negative");
    require(c.beta1 >= 0.0 && c.beta1 < 1.0 && c.beta2 >= 0.0 && c.beta2 < 1.0, ErrorKind::ConfigParse,
            "betas must lie in [0, 1)");
    require(c.eps > 0.0, ErrorKind::ConfigParse, "eps must be positive");
    require(c.prob_clamp > 0.0 && c.prob_clamp < 0.5, ErrorKind::ConfigParse, "prob_clamp must lie in (0, 0.5)");
    require(c.clip_norm >= 0.0, ErrorKind::ConfigParse, "clip_norm must be non-negative");
}

double bce_loss(std::span<const double> probs, std::span<const std::uint8_t> labels, double clamp) {
    require(probs.size() == labels.size(), ErrorKind::LengthMismatch,
            std::to_string(probs.size()) + " probabilities vs " + std::to_string(labels.size()) + " labels");
    require(!probs.empty(), ErrorKind::EmptyBatch, "BCE of an empty batch");
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double p = std::clamp(probs[i], clamp, 1.0 - clamp);
        sum += labels[i] ? std::log(p) : std::log1p(-p);
    }
    return -sum / static_cast<double>(probs.size());
}

LossAndGrad bce_with_logits(const Tensor& logits, std::span<const std::uint8_t> labels, double clamp) {
    require(logits.size() == labels.size(), ErrorKind::LengthMismatch,
            std::to_string(logits.size()) + " logits vs " + std::to_string(labels.size()) + " labels");
    require(logits.size() > 0, ErrorKind::EmptyBatch, "BCE of an empty batch");
    const auto n = static_cast<double>(logits.size());
    std::vector<double> probs(logits.size());
    LossAndGrad out{0.0, Tensor(logits.shape())};
    for (std::size_t i = 0; i < logits.size(); ++i) {
        probs[i] = sigmoid(logits[i]);
        out.grad[i] = (probs[i] - static_cast<double>(labels[i])) / n;
    }
    out.loss = bce_loss(probs, labels, clamp);
    return out;
}

void AdamW::step(const std::vector<NamedParameter>& params) {
    for (const auto& p : params)
        require(p.param->grad.all_finite(), ErrorKind::NonFiniteGradient, "gradient of " + p.name + " is not finite");
    if (m_.empty()) {
        for (const auto& p : params) {
            m_.emplace_back(p.param->value.shape());
            v_.emplace_back(p.param->value.shape());
        }
    }
    require(m_.size() == params.size(), ErrorKind::ShapeMismatch, "parameter list changed between steps");

    ++steps_;
    const double lr = config_.learning_rate;
    const double b1 = config_.beta1, b2 = config_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
    for (std::size_t k = 0; k < params.size(); ++k) {
        Parameter& p = *params[k].param;
        double* theta = p.value.data();
        double* g = p.grad.data();
        double* m = m_[k].data();
        double* v = v_[k].data();
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            const double mhat = m[i] / c1;
            const double vhat = v[i] / c2;
            theta[i] -= lr * (mhat / (std::sqrt(vhat) + config_.eps)) + lr * config_.weight_decay * theta[i];
            g[i] = 0.0;
        }
    }
}

bool clip_gradients(const std::vector<NamedParameter>& params, double max_norm) {
    double sq = 0.0;
    for (const auto& p : params)
        for (double g : p.param->grad.values()) sq += g * g;
    const double norm = std::sqrt(sq);
    if (!(norm > max_norm)) return false;
    const double factor = max_norm / norm;
    for (const auto& p : params)
        for (double& g : p.param->grad.values()) g *= factor;
    return true;
}

std::vector<std::size_t> epoch_order(std::size_t rows, std::uint64_t seed, std::size_t epoch) {
    std::vector<std::size_t> order(rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = Rng::derive(seed, epoch);
    rng.shuffle(order);
    return order;
}

Tensor gather_rows(const DatasetSplit& split, std::span<const std::size_t> rows) {
    const std::size_t dim = split.features.dim(1);
    Tensor batch({rows.size(), dim});
    for (std::size_t i = 0; i < rows.size(); ++i)
        std::copy_n(split.features.data() + rows[i] * dim, dim, batch.data() + i * dim);
    return batch;
}

Confusion evaluate(Model& model, const DatasetSplit& split, std::size_t batch_size, double threshold) {
    Confusion conf;
    std::vector<std::size_t> rows;
    for (std::size_t start = 0; start < split.rows(); start += batch_size) {
        const std::size_t end = std::min(split.rows(), start + batch_size);
        rows.resize(end - start);
        std::iota(rows.begin(), rows.end(), start);
        const auto predicted = model.predict(gather_rows(split, rows), threshold);
        conf = accumulate(conf, predicted, std::span(split.labels).subspan(start, end - start));
    }
    return conf;
}

RunReport train_model(Model& model, const DatasetSplit& train, const DatasetSplit& test, const TrainConfig& config,
                      const EpochCallback& on_epoch) {
    validate(config);
    require(train.rows() > 0, ErrorKind::EmptyBatch, "training split has no rows");
    require(train.features.rank() == 2 && train.features.dim(1) == model.spec().input_dim, ErrorKind::SchemaMismatch,
            "training features " + shape_string(train.features.shape()) + " do not match model input_dim " +
                std::to_string(model.spec().input_dim));
    require(test.rows() == 0 || (test.features.rank() == 2 && test.features.dim(1) == model.spec().input_dim),
            ErrorKind::SchemaMismatch, "test features do not match the model input");

    const auto started = std::chrono::steady_clock::now();
    RunReport report;
    report.model = model.name();
    report.data_fingerprint = train.fingerprint;
    report.spec = model.spec();
    report.config = config;
    report.parameter_count = model.parameter_count();

    auto params = model.parameters();
    AdamW optimizer(config);
    model.zero_grad();

    std::vector<std::uint8_t> labels;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const auto order = epoch_order(train.rows(), config.seed, epoch);
        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            const std::span<const std::size_t> rows(order.data() + start, end - start);
            labels.resize(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i) labels[i] = train.labels[rows[i]];

            const Tensor logits = model.forward(gather_rows(train, rows));
            const LossAndGrad lg = bce_with_logits(logits, labels, config.prob_clamp);
            require(std::isfinite(lg.loss), ErrorKind::Divergence,
                    "non-finite loss at epoch " + std::to_string(epoch + 1));
            loss_sum += lg.loss * static_cast<double>(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i)
                correct += static_cast<std::size_t>((logits[i] >= 0.0) == (labels[i] == 1));

            model.backward(lg.grad);
            if (config.clip_norm > 0.0 && clip_gradients(params, config.clip_norm)) ++report.clipped_steps;
            try {
                optimizer.step(params);
            } catch (const Error& e) {
                throw Error(ErrorKind::Divergence, e.what());
            }
        }
        EpochLog log{epoch + 1, loss_sum / static_cast<double>(train.rows()),
                     static_cast<double>(correct) / static_cast<double>(train.rows())};
        report.epoch_losses.push_back(log.loss);
        report.epoch_train_accuracy.push_back(log.train_accuracy);
        if (on_epoch && !on_epoch(log)) break;
    }

    if (test.rows() > 0) {
        report.confusion = evaluate(model, test, config.batch_size);
        report.metrics = metrics(report.confusion);
        report.macro = macro_metrics(report.confusion);
    }
    report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

}  // namespace kanids
