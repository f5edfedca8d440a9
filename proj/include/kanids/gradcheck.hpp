#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kanids/layers.hpp"
#include "kanids/models.hpp"

namespace kanids {

struct GradcheckOptions {
    std::size_t seeds = 20;
    double tolerance = 1e-4;
    double step = 1e-5;
    /// Entries below this magnitude are compared absolutely rather than relatively.
    double floor = 1e-8;
    /// 0 checks every element; otherwise this many randomly chosen elements per tensor.
    std::size_t max_checks_per_tensor = 0;
    /// Test hook: cases whose name equals this get a corrupted analytic gradient.
    std::string corrupt;
};

/// |analytic - numeric| / max(|analytic|, |numeric|, floor)
double relative_error(double analytic, double numeric, double floor);

struct GradientProbe {
    std::function<Tensor(const Tensor&)> forward;
    std::function<Tensor(const Tensor&)> backward;
    std::vector<Parameter*> params;
};

GradientProbe probe(Layer& layer);
GradientProbe probe(Model& model);

/// Compares the analytic input and parameter gradients of loss = sum(w * f(x))
/// (w drawn from `seed`) with central differences; returns the largest relative error.
double max_gradient_error(const GradientProbe& p, Tensor x, std::uint64_t seed, const GradcheckOptions& options,
                          bool corrupt = false);

struct GradcheckCase {
    std::string name;
    std::size_t seeds = 0;
    double max_rel_error = 0.0;
    bool passed = false;
};

/// Every layer kind, each over options.seeds seeds, including a degree-0 spline edge.
std::vector<GradcheckCase> run_gradcheck(const GradcheckOptions& options = {});

std::string format_gradcheck(const std::vector<GradcheckCase>& cases);

}  // namespace kanids
