#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "kanids/gradcheck.hpp"
#include "kanids/kan.hpp"

using namespace kanids;
using fixtures::error_kind;

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Tensor t(std::move(shape));
    for (double& v : t.values()) v = rng.uniform(lo, hi);
    return t;
}

double oracle_silu(double u) { return u / (1.0 + std::exp(-u)); }

// Edge value from the raw parameter tensors and the recursive basis definition.
double oracle_edge(const LayerParams& p, const SplineGrid& g, std::size_t edges, std::size_t out, std::size_t edge,
                   double u) {
    const std::size_t k = g.basis_count();
    const std::size_t e = out * edges + edge;
    double spline = 0.0;
    for (std::size_t b = 0; b < k; ++b)
        spline += p.get("spline_coeffs").value[e * k + b] *
                  fixtures::cox_de_boor(g.knots(), static_cast<int>(b), g.degree(), u);
    return p.get("edge_scale").value[e] * (p.get("base_weight").value[e] * oracle_silu(u) + spline);
}

void randomize(LayerParams& p, Rng& rng) {
    for (auto& e : p.entries())
        for (double& v : e.value.values()) v = rng.uniform(-1, 1);
}

}  // namespace

TEST_CASE("kan edge closed forms") {
    Rng rng(1);
    const auto grid = make_grid(-1, 1, 5, 3);
    KanLinear layer(2, 3, grid, rng);
    auto& p = *layer.params();

    p.get("spline_coeffs").value.fill(0.0);
    p.get("base_weight").value.fill(0.0);
    for (double u : {-0.7, 0.0, 0.4}) CHECK(layer.edge(1, 2, u) == 0.0);

    p.get("base_weight").value.fill(1.0);
    CHECK(layer.edge(0, 0, 0.0) == 0.0);

    p.get("base_weight").value.fill(0.0);
    p.get("edge_scale").value.fill(1.7);
    const std::size_t k = grid.basis_count();
    const std::size_t e = 2 * 2 + 1;  // output 2, input 1
    p.get("spline_coeffs").value[e * k + 4] = 0.6;
    for (double u : {-0.9, -0.2, 0.35, 0.8})
        CHECK(layer.edge(1, 2, u) ==
              doctest::Approx(1.7 * 0.6 * fixtures::cox_de_boor(grid.knots(), 4, 3, u)).epsilon(1e-12));

    CHECK(error_kind([&] { layer.edge(2, 0, 0.1); }) == ErrorKind::IndexOutOfRange);
    CHECK(error_kind([&] { layer.edge(0, 3, 0.1); }) == ErrorKind::IndexOutOfRange);
}

TEST_CASE("kan forward equals the per-edge sum") {
    Rng rng(2);
    const auto grid = make_grid(-1, 1, 5, 3);
    KanLinear layer(3, 2, grid, rng);
    randomize(*layer.params(), rng);
    const Tensor x = random_tensor({4, 3}, rng, -1.3, 1.3);
    const Tensor y = layer.forward(x);
    REQUIRE(y.shape() == Shape{4, 2});
    for (std::size_t b = 0; b < 4; ++b)
        for (std::size_t j = 0; j < 2; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < 3; ++i) s += oracle_edge(*layer.params(), grid, 3, j, i, x.at({b, i}));
            CHECK(std::abs(y.at({b, j}) - s) < 1e-12);
        }

    KanLinear single(1, 1, grid, rng);
    const Tensor u({1, 1}, std::vector<double>{0.37});
    CHECK(single.forward(u)[0] == doctest::Approx(single.edge(0, 0, 0.37)).epsilon(1e-14));

    for (auto& e : layer.params()->entries()) e.value.fill(0.0);
    const Tensor zero = layer.forward(x);
    for (double v : zero.values()) CHECK(v == 0.0);
    CHECK(error_kind([&] { layer.forward(Tensor({1, 4})); }) == ErrorKind::ShapeMismatch);
}

TEST_CASE("kan backward closed forms") {
    Rng rng(3);
    const auto grid = make_grid(-1, 1, 4, 3);
    KanLinear layer(1, 1, grid, rng);
    CHECK(error_kind([&] { layer.backward(Tensor({1, 1})); }) == ErrorKind::NoCachedForward);
    randomize(*layer.params(), rng);
    const double u = 0.23, g = -1.4;
    layer.forward(Tensor({1, 1}, std::vector<double>{u}));
    const Tensor zero = layer.backward(Tensor({1, 1}));
    CHECK(zero[0] == 0.0);
    for (const auto& p : layer.params()->entries())
        for (double v : p.grad.values()) CHECK(v == 0.0);

    const Tensor dx = layer.backward(Tensor({1, 1}, std::vector<double>{g}));
    const auto& p = *layer.params();
    const auto basis = eval_basis(grid, u);
    double slope = p.get("base_weight").value[0] * silu_grad(u);
    for (std::size_t k = 0; k < grid.basis_count(); ++k) slope += p.get("spline_coeffs").value[k] * basis.derivs[k];
    CHECK(dx[0] == doctest::Approx(p.get("edge_scale").value[0] * slope * g).epsilon(1e-12));
}

TEST_CASE("kan parameter count") {
    Rng rng(4);
    for (int G : {1, 5, 9})
        for (int r : {0, 3}) {
            KanLinear layer(7, 3, make_grid(-1, 1, G, r), rng);
            CHECK(layer.params()->count() == 7u * 3u * static_cast<std::size_t>(G + r + 2));
        }
}

TEST_CASE("conv kan forward equals the naive edge loop") {
    Rng rng(5);
    const auto grid = make_grid(-1, 1, 3, 3);
    for (std::size_t pad : {0u, 1u}) {
        ConvKan layer({2, 2, 3, 3, pad}, grid, rng);
        randomize(*layer.params(), rng);
        const Tensor x = random_tensor({2, 2, 4, 5}, rng);
        const Tensor y = layer.forward(x);
        const std::size_t oh = 4 + 2 * pad - 2, ow = 5 + 2 * pad - 2;
        REQUIRE(y.shape() == Shape{2, 2, oh, ow});
        double worst = 0.0;
        for (std::size_t b = 0; b < 2; ++b)
            for (std::size_t o = 0; o < 2; ++o)
                for (std::size_t i = 0; i < oh; ++i)
                    for (std::size_t j = 0; j < ow; ++j) {
                        double s = 0.0;
                        for (std::size_t c = 0; c < 2; ++c)
                            for (std::size_t m = 0; m < 3; ++m)
                                for (std::size_t n = 0; n < 3; ++n) {
                                    const long r = static_cast<long>(i + m) - static_cast<long>(pad);
                                    const long q = static_cast<long>(j + n) - static_cast<long>(pad);
                                    if (r < 0 || q < 0 || r >= 4 || q >= 5) continue;
                                    const double u = x.at({b, c, static_cast<std::size_t>(r), static_cast<std::size_t>(q)});
                                    s += oracle_edge(*layer.params(), grid, 18, o, (c * 3 + m) * 3 + n, u);
                                    CHECK(layer.edge(o, c, m, n, u) ==
                                          doctest::Approx(oracle_edge(*layer.params(), grid, 18, o, (c * 3 + m) * 3 + n, u)));
                                }
                        worst = std::max(worst, std::abs(y.at({b, o, i, j}) - s));
                    }
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("1x1 conv kan is the pixelwise kan layer") {
    Rng rng(6);
    const auto grid = make_grid(-1, 1, 5, 3);
    ConvKan conv({1, 3, 1, 1, 0}, grid, rng);
    randomize(*conv.params(), rng);
    Rng rng2(7);
    KanLinear dense(1, 3, grid, rng2);
    for (const char* name : {"spline_coeffs", "base_weight", "edge_scale"})
        dense.params()->get(name).value = conv.params()->get(name).value.reshaped(dense.params()->get(name).value.shape());
    const Tensor x = random_tensor({1, 1, 2, 3}, rng);
    const Tensor y = conv.forward(x);
    const Tensor z = dense.forward(x.reshaped({6, 1}));
    for (std::size_t o = 0; o < 3; ++o)
        for (std::size_t p = 0; p < 6; ++p) CHECK(std::abs(y[o * 6 + p] - z[p * 3 + o]) < 1e-12);

    for (auto& e : conv.params()->entries()) e.value.fill(0.0);
    const Tensor zero = conv.forward(x);
    for (double v : zero.values()) CHECK(v == 0.0);
}

TEST_CASE("kan gradients over random seeds") {
    GradcheckOptions options;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Rng rng(seed);
        const auto grid = make_grid(-1, 1, 1 + static_cast<int>(seed % 6), static_cast<int>(seed % 4));
        KanLinear layer(2, 3, grid, rng);
        Tensor x({2, 2});
        for (double& v : x.values()) {
            do v = rng.uniform(-1.2, 1.2);
            while ([&] {
                for (double k : grid.knots())
                    if (std::abs(v - k) < 1e-3) return true;
                return false;
            }());
        }
        CHECK(max_gradient_error(probe(layer), x, seed, options) < 1e-4);
    }
}

TEST_CASE("smooth fits of trivial targets") {
    const SmoothFitOptions options;
    const auto zero = fit_smooth_1d([](double) { return 0.0; }, {3, 5}, options);
    for (double l : zero) CHECK(l < 1e-6);
    const auto identity = fit_smooth_1d([](double x) { return x; }, {1, 3, 5}, options);
    for (double l : identity) CHECK(l < 1e-4);
}
