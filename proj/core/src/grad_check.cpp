#include "stgcn/grad_check.hpp"

#include <cmath>
#include <stdexcept>

namespace stgcn {

GradCheckReport grad_check_report(const LossFn& loss, ParameterStore& point, double step) {
    if (step <= 0.0) {
        throw std::invalid_argument("grad_check: step must be positive");
    }
    point.zero_gradients();
    double base = loss(point);
    if (!std::isfinite(base)) {
        throw std::runtime_error("grad_check: non-finite loss at the base point");
    }
    // Snapshot the analytic gradients before the numeric passes clobber them.
    std::vector<Tensor> analytic;
    analytic.reserve(point.count());
    for (std::size_t i = 0; i < point.count(); ++i) analytic.push_back(point.grad(i));

    GradCheckReport report;
    for (std::size_t i = 0; i < point.count(); ++i) {
        GradCheckEntry entry;
        entry.name = point.entry(i).name;
        Tensor& value = point.value(i);
        for (std::size_t k = 0; k < value.size(); ++k) {
            double saved = value[k];
            value[k] = saved + step;
            double up = loss(point);
            value[k] = saved - step;
            double down = loss(point);
            value[k] = saved;
            if (!std::isfinite(up) || !std::isfinite(down)) {
                throw std::runtime_error("grad_check: non-finite loss while perturbing '" +
                                         entry.name + "'");
            }
            double numeric = (up - down) / (2.0 * step);
            double a = analytic[i][k];
            double rel = std::fabs(a - numeric) /
                         std::max({std::fabs(a), std::fabs(numeric), 1e-8});
            entry.max_rel_err = std::max(entry.max_rel_err, rel);
        }
        report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
        report.entries.push_back(std::move(entry));
    }
    // Leave the store holding the analytic gradients of the unperturbed point.
    for (std::size_t i = 0; i < point.count(); ++i) point.grad(i) = analytic[i];
    return report;
}

double grad_check(const LossFn& loss, ParameterStore& point, double step) {
    return grad_check_report(loss, point, step).max_rel_err;
}

}  // namespace stgcn
