#pragma once

#include <functional>
#include <string>
#include <vector>

#include "stgcn/param_store.hpp"

namespace stgcn {

/// A differentiable scalar objective: reads current values from the store,
/// returns the loss and accumulates (+=) analytic gradients into the store.
/// grad_check zeroes the gradients before the one analytic evaluation; the
/// numeric passes ignore whatever the callback accumulates.
using LossFn = std::function<double(ParameterStore&)>;

struct GradCheckEntry {
    std::string name;
    double max_rel_err = 0.0;
};

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::vector<GradCheckEntry> entries;
};

/// Central-difference check of every element of every registered parameter.
/// Relative error per element is |a - n| / max(|a|, |n|, 1e-8); the report
/// carries the per-parameter and global maxima. Throws if the loss is
/// non-finite at the base point or any perturbed point. `step` must be > 0.
GradCheckReport grad_check_report(const LossFn& loss, ParameterStore& point, double step);

/// Convenience wrapper returning only the global maximum relative error.
double grad_check(const LossFn& loss, ParameterStore& point, double step);

}  // namespace stgcn
