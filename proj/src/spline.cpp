#include "kanids/spline.hpp"

#include <array>
#include <cmath>
#include <string>

#include "kanids/error.hpp"

namespace kanids {

namespace {

constexpr int kMaxDegree = 15;

}  // namespace

SplineGrid make_grid(double domain_lo, double domain_hi, int grid_size, int degree) {
    require(std::isfinite(domain_lo) && std::isfinite(domain_hi) && domain_lo < domain_hi, ErrorKind::InvalidBounds,
            "domain_lo must be below domain_hi");
    require(grid_size >= 1, ErrorKind::InvalidSize, "grid_size must be at least 1");
    require(degree >= 0 && degree <= kMaxDegree, ErrorKind::InvalidSize,
            "degree must lie in [0, " + std::to_string(kMaxDegree) + "]");

    SplineGrid grid;
    grid.lo_ = domain_lo;
    grid.hi_ = domain_hi;
    grid.grid_size_ = grid_size;
    grid.degree_ = degree;
    const long count = grid_size + 2L * degree + 1;
    grid.knots_.reserve(static_cast<std::size_t>(count));
    for (long k = 0; k < count; ++k) grid.knots_.push_back(grid.knot(k));
    return grid;
}

BasisEval eval_basis(const SplineGrid& grid, double x) {
    BasisEval out;
    out.values.assign(grid.basis_count(), 0.0);
    out.derivs.assign(grid.basis_count(), 0.0);
    eval_basis_into(grid, x, out.values, out.derivs);
    return out;
}

void eval_basis_into(const SplineGrid& grid, double x, std::span<double> values, std::span<double> derivs) {
    require(std::isfinite(x), ErrorKind::NonFiniteInput, "spline input is not finite");
    const std::size_t count = grid.basis_count();
    require(values.size() == count && (derivs.empty() || derivs.size() == count), ErrorKind::ShapeMismatch,
            "basis output spans must hold basis_count entries");
    std::fill(values.begin(), values.end(), 0.0);
    std::fill(derivs.begin(), derivs.end(), 0.0);

    const auto& t = grid.knots();
    const long last = static_cast<long>(t.size()) - 1;
    if (x < t.front() || x > t.back()) return;

    // Knot span s with t[s] <= x < t[s+1]; the final interval is closed on the right.
    long span = static_cast<long>(std::floor((x - t.front()) / grid.spacing()));
    if (span > last - 1) span = last - 1;
    if (span < 0) span = 0;
    while (span > 0 && x < t[span]) --span;
    while (span < last - 1 && x >= t[span + 1]) ++span;

    const int p = grid.degree();
    std::array<double, kMaxDegree + 1> basis{};
    std::array<double, kMaxDegree + 1> lower{};
    std::array<double, kMaxDegree + 1> left{};
    std::array<double, kMaxDegree + 1> right{};

    // Triangular Cox-de Boor on the nonzero functions of `span`; lower keeps degree p-1.
    basis[0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        if (j == p) lower = basis;
        left[j] = x - grid.knot(span + 1 - j);
        right[j] = grid.knot(span + j) - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double temp = basis[r] / (right[r + 1] + left[j - r]);
            basis[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        basis[j] = saved;
    }

    // basis[k] is function span - p + k; lower[k] is the degree p-1 function span - p + 1 + k.
    auto lower_at = [&](long i) -> double {
        const long k = i - (span - p + 1);
        return (k >= 0 && k < p) ? lower[k] : 0.0;
    };
    for (int k = 0; k <= p; ++k) {
        const long i = span - p + k;
        if (i < 0 || i >= static_cast<long>(count)) continue;
        values[i] = basis[k];
        if (!derivs.empty() && p > 0) {
            const double a = lower_at(i) / (grid.knot(i + p) - grid.knot(i));
            const double b = lower_at(i + 1) / (grid.knot(i + p + 1) - grid.knot(i + 1));
            derivs[i] = p * (a - b);
        }
    }
}

}  // namespace kanids
