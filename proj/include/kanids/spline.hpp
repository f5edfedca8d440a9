#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kanids {

/// Uniform B-spline knot grid over [domain_lo, domain_hi] with `degree`
/// extension knots on each side. Immutable once built.
class SplineGrid {
public:
    double domain_lo() const noexcept { return lo_; }
    double domain_hi() const noexcept { return hi_; }
    int grid_size() const noexcept { return grid_size_; }
    int degree() const noexcept { return degree_; }
    double spacing() const noexcept { return (hi_ - lo_) / grid_size_; }

    const std::vector<double>& knots() const noexcept { return knots_; }
    std::size_t basis_count() const noexcept { return static_cast<std::size_t>(grid_size_ + degree_); }

    /// Knot k of the uniform sequence extended infinitely in both directions;
    /// agrees bit-for-bit with knots()[k] for 0 <= k < knots().size().
    double knot(long k) const noexcept { return lo_ + static_cast<double>(k - degree_) * spacing(); }

    friend SplineGrid make_grid(double domain_lo, double domain_hi, int grid_size, int degree);
    friend bool operator==(const SplineGrid&, const SplineGrid&) = default;

private:
    SplineGrid() = default;

    double lo_ = -1.0;
    double hi_ = 1.0;
    int grid_size_ = 1;
    int degree_ = 0;
    std::vector<double> knots_;
};

SplineGrid make_grid(double domain_lo, double domain_hi, int grid_size, int degree);

struct BasisEval {
    std::vector<double> values;
    std::vector<double> derivs;
};

/// Values and first derivatives of all basis functions at x.
/// Outside the extended knots every basis function is zero.
BasisEval eval_basis(const SplineGrid& grid, double x);

/// Allocation-free form of eval_basis; both spans must hold basis_count() entries.
/// `derivs` may be empty when derivatives are not needed.
void eval_basis_into(const SplineGrid& grid, double x, std::span<double> values, std::span<double> derivs);

}  // namespace kanids
