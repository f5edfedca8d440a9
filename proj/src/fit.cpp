#include <cmath>

#include "kanids/error.hpp"
#include "kanids/kan.hpp"
#include "kanids/train.hpp"

namespace kanids {

std::vector<double> fit_smooth_1d(const std::function<double(double)>& target, const std::vector<int>& grid_sizes,
                                  const SmoothFitOptions& options) {
    require(options.samples >= 2, ErrorKind::InvalidSize, "need at least two samples");
    const std::size_t n = options.samples;
    Tensor x({n, 1});
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
        y[i] = target(x[i]);
    }

    TrainConfig config;
    config.learning_rate = options.learning_rate;
    config.weight_decay = 0.0;

    std::vector<double> losses;
    for (int g : grid_sizes) {
        Rng rng(options.seed);
        KanLinear layer(1, 1, make_grid(-1.0, 1.0, g, options.degree), rng);
        std::vector<NamedParameter> params;
        for (auto& p : layer.params()->entries()) params.push_back({p.name, &p});
        AdamW optimizer(config);

        double loss = 0.0;
        Tensor grad({n, 1});
        for (std::size_t step = 0; step <= options.steps; ++step) {
            const Tensor out = layer.forward(x);
            loss = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double r = out[i] - y[i];
                loss += r * r;
                grad[i] = 2.0 * r / static_cast<double>(n);
            }
            loss /= static_cast<double>(n);
            if (step == options.steps) break;
            layer.backward(grad);
            optimizer.step(params);
        }
        losses.push_back(loss);
    }
    return losses;
}

}  // namespace kanids
