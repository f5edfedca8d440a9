#include "kanids/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numeric>
#include <sstream>

#include "kanids/kan.hpp"
#include "kanids/rng.hpp"
#include "kanids/spline.hpp"

namespace kanids {

double relative_error(double analytic, double numeric, double floor) {
    const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
    return std::abs(analytic - numeric) / scale;
}

GradientProbe probe(Layer& layer) {
    GradientProbe p{[&layer](const Tensor& x) { return layer.forward(x); },
                    [&layer](const Tensor& g) { return layer.backward(g); },
                    {}};
    if (auto* params = layer.params())
        for (auto& e : params->entries()) p.params.push_back(&e);
    return p;
}

GradientProbe probe(Model& model) {
    GradientProbe p{[&model](const Tensor& x) { return model.forward(x); },
                    [&model](const Tensor& g) {
                        model.backward(g);
                        return Tensor();
                    },
                    {}};
    for (auto& np : model.parameters()) p.params.push_back(np.param);
    return p;
}

namespace {

long double weighted_sum(const Tensor& y, const Tensor& w) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < y.size(); ++i) s += static_cast<long double>(y[i]) * w[i];
    return s;
}

std::vector<std::size_t> chosen_indices(std::size_t n, std::size_t limit, Rng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (limit == 0 || limit >= n) return idx;
    rng.shuffle(idx);
    idx.resize(limit);
    std::sort(idx.begin(), idx.end());
    return idx;
}

// Uniform values in [lo, hi] kept at least `margin` away from every knot, so
// central differences never straddle a kink of a low-degree spline.
Tensor away_from_knots(Shape shape, const SplineGrid& grid, Rng& rng, double lo, double hi, double margin) {
    Tensor t(std::move(shape));
    for (double& v : t.values()) {
        while (true) {
            v = rng.uniform(lo, hi);
            bool near = false;
            for (double k : grid.knots()) near = near || std::abs(v - k) < margin;
            if (!near) break;
        }
    }
    return t;
}

Tensor uniform_input(Shape shape, Rng& rng) {
    Tensor t(std::move(shape));
    for (double& v : t.values()) v = rng.uniform(-1.0, 1.0);
    return t;
}

}  // namespace

double max_gradient_error(const GradientProbe& p, Tensor x, std::uint64_t seed, const GradcheckOptions& options,
                          bool corrupt) {
    Rng rng = Rng::derive(seed, 0x9e3779b9ULL);
    for (Parameter* param : p.params) param->grad.fill(0.0);

    const Tensor y = p.forward(x);
    Tensor w(y.shape());
    for (double& v : w.values()) v = rng.uniform(-1.0, 1.0);
    Tensor dx = p.backward(w);
    std::vector<Tensor> dparams;
    for (Parameter* param : p.params) dparams.push_back(param->grad);

    if (corrupt) {
        Tensor& target = dx.size() > 0 ? dx : dparams.front();
        target[0] += 0.5 * std::abs(target[0]) + 1e-2;
    }

    const double h = options.step;
    double worst = 0.0;
    auto central = [&](double& slot) {
        const double saved = slot;
        slot = saved + h;
        const long double up = weighted_sum(p.forward(x), w);
        slot = saved - h;
        const long double down = weighted_sum(p.forward(x), w);
        slot = saved;
        return static_cast<double>((up - down) / (2.0L * h));
    };

    if (dx.size() > 0) {
        for (std::size_t i : chosen_indices(x.size(), options.max_checks_per_tensor, rng)) {
            const double numeric = central(x[i]);
            worst = std::max(worst, relative_error(dx[i], numeric, options.floor));
        }
    }
    for (std::size_t k = 0; k < p.params.size(); ++k) {
        Tensor& value = p.params[k]->value;
        for (std::size_t i : chosen_indices(value.size(), options.max_checks_per_tensor, rng)) {
            const double numeric = central(value[i]);
            worst = std::max(worst, relative_error(dparams[k][i], numeric, options.floor));
        }
    }
    return worst;
}

namespace {

using CaseFn = std::function<double(std::uint64_t seed, const GradcheckOptions&, bool corrupt)>;

template <typename MakeLayer, typename MakeInput>
CaseFn layer_case(MakeLayer make_layer, MakeInput make_input) {
    return [=](std::uint64_t seed, const GradcheckOptions& options, bool corrupt) {
        Rng init(seed);
        std::unique_ptr<Layer> layer = make_layer(seed, init);
        Rng data = Rng::derive(seed, 1);
        Tensor x = make_input(seed, data);
        return max_gradient_error(probe(*layer), x, seed, options, corrupt);
    };
}

}  // namespace

std::vector<GradcheckCase> run_gradcheck(const GradcheckOptions& options) {
    const Activation activations[] = {Activation::Identity, Activation::Relu, Activation::Sigmoid, Activation::Tanh};
    const SplineGrid cubic = make_grid(-1.0, 1.0, 5, 3);
    const SplineGrid coarse = make_grid(-1.0, 1.0, 3, 2);
    const SplineGrid step_grid = make_grid(-1.0, 1.0, 4, 0);

    std::vector<std::pair<std::string, CaseFn>> cases;
    cases.emplace_back("dense", layer_case(
        [&](std::uint64_t s, Rng& r) { return std::make_unique<Dense>(5, 4, activations[s % 4], r); },
        [](std::uint64_t, Rng& r) { return uniform_input({3, 5}, r); }));
    cases.emplace_back("conv2d", layer_case(
        [&](std::uint64_t s, Rng& r) {
            return std::make_unique<Conv2d>(Conv2dOptions{2, 3, 3, 3, s % 2, activations[s % 4]}, r);
        },
        [](std::uint64_t, Rng& r) { return uniform_input({2, 2, 5, 4}, r); }));
    cases.emplace_back("maxpool2d", layer_case(
        [](std::uint64_t, Rng&) { return std::make_unique<MaxPool2d>(2); },
        [](std::uint64_t, Rng& r) { return uniform_input({2, 2, 5, 5}, r); }));
    cases.emplace_back("flatten", layer_case(
        [](std::uint64_t, Rng&) { return std::make_unique<Flatten>(); },
        [](std::uint64_t, Rng& r) { return uniform_input({2, 2, 3, 3}, r); }));
    cases.emplace_back("square_reshape", layer_case(
        [](std::uint64_t, Rng&) { return std::make_unique<SquareReshape>(7); },
        [](std::uint64_t, Rng& r) { return uniform_input({2, 7}, r); }));
    cases.emplace_back("rows_as_sequence", layer_case(
        [](std::uint64_t, Rng&) { return std::make_unique<RowsAsSequence>(); },
        [](std::uint64_t, Rng& r) { return uniform_input({2, 2, 3, 3}, r); }));
    cases.emplace_back("lstm", layer_case(
        [](std::uint64_t, Rng& r) { return std::make_unique<Lstm>(3, 4, r); },
        [](std::uint64_t, Rng& r) { return uniform_input({2, 3, 3}, r); }));
    cases.emplace_back("kan_linear", layer_case(
        [&](std::uint64_t, Rng& r) { return std::make_unique<KanLinear>(3, 2, cubic, r); },
        [&](std::uint64_t, Rng& r) { return away_from_knots({3, 3}, cubic, r, -1.0, 1.0, 1e-3); }));
    cases.emplace_back("kan_linear_degree0", layer_case(
        [&](std::uint64_t, Rng& r) { return std::make_unique<KanLinear>(3, 2, step_grid, r); },
        [&](std::uint64_t, Rng& r) { return away_from_knots({3, 3}, step_grid, r, -1.0, 1.0, 1e-3); }));
    cases.emplace_back("conv_kan", layer_case(
        [&](std::uint64_t s, Rng& r) {
            return std::make_unique<ConvKan>(ConvKanOptions{2, 2, 3, 3, s % 2}, coarse, r);
        },
        [&](std::uint64_t, Rng& r) { return away_from_knots({2, 2, 4, 4}, coarse, r, -1.0, 1.0, 1e-3); }));

    std::vector<GradcheckCase> out;
    for (const auto& [name, fn] : cases) {
        GradcheckCase c{name, options.seeds, 0.0, true};
        const bool corrupt = options.corrupt == name;
        for (std::size_t s = 1; s <= options.seeds; ++s)
            c.max_rel_error = std::max(c.max_rel_error, fn(s, options, corrupt));
        c.passed = c.max_rel_error <= options.tolerance;
        out.push_back(c);
    }
    return out;
}

std::string format_gradcheck(const std::vector<GradcheckCase>& cases) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%-20s %6s %14s  %s\n", "layer", "seeds", "max rel error", "result");
    out << line;
    for (const auto& c : cases) {
        std::snprintf(line, sizeof line, "%-20s %6zu %14.3e  %s\n", c.name.c_str(), c.seeds, c.max_rel_error,
                      c.passed ? "pass" : "FAIL");
        out << line;
    }
    return out.str();
}

}  // namespace kanids
