#include "backaudit/parity.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "backaudit/error.hpp"
#include "backaudit/kernels.hpp"

namespace backaudit {

namespace {

std::vector<kernels::GroupSums> sums_of(const ContextColumn& contexts,
                                        std::span<const double> values) {
    if (values.empty()) throw DataError("parity: empty input");
    if (values.size() != contexts.size()) {
        throw DataError(fmt::format("parity: {} context rows vs {} values", contexts.size(),
                                    values.size()));
    }
    return kernels::parallel::group_sums(contexts.ids(), contexts.n_groups(), values, values);
}

std::vector<double> group_means(const std::vector<kernels::GroupSums>& sums) {
    std::vector<double> means(sums.size(), 0.0);
    for (std::size_t g = 0; g < sums.size(); ++g) {
        if (sums[g].count > 0) means[g] = sums[g].sum_y / static_cast<double>(sums[g].count);
    }
    return means;
}

std::vector<double> rounded_by_group(const ContextColumn& contexts, std::span<const double> h) {
    const auto means = group_means(sums_of(contexts, h));
    std::vector<double> out(contexts.size());
    kernels::parallel::gather(contexts.ids(), means, out);
    return out;
}

}  // namespace

ResidualPredictorOutput residualize(const ContextColumn& contexts, std::span<const double> h,
                                    double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw ConfigError(fmt::format("residualize: alpha {} outside [0,1]", alpha));
    }
    auto rounded = rounded_by_group(contexts, h);
    ResidualPredictorOutput out{alpha, std::vector<double>(h.size())};
    for (std::size_t i = 0; i < h.size(); ++i) out.values[i] = h[i] - alpha * rounded[i];
    return out;
}

ParityCheck first_order_parity_check(const ContextColumn& contexts,
                                     std::span<const double> values, double tolerance) {
    const auto sums = sums_of(contexts, values);
    ParityCheck out;
    out.group_means = group_means(sums);
    for (std::size_t g = 0; g < sums.size(); ++g) {
        if (sums[g].count == 0) continue;
        out.max_group_mean_abs = std::max(out.max_group_mean_abs, std::abs(out.group_means[g]));
    }
    out.holds = out.max_group_mean_abs <= tolerance;
    return out;
}

double group_mean_dispersion(const ContextColumn& contexts, std::span<const double> values) {
    const auto sums = sums_of(contexts, values);
    const auto means = group_means(sums);
    const auto n = static_cast<double>(values.size());
    double overall = 0.0;
    for (std::size_t g = 0; g < sums.size(); ++g) {
        overall += static_cast<double>(sums[g].count) / n * means[g];
    }
    double dispersion = 0.0;
    for (std::size_t g = 0; g < sums.size(); ++g) {
        const double d = means[g] - overall;
        dispersion += static_cast<double>(sums[g].count) / n * d * d;
    }
    return dispersion;
}

PythagoreanDecomposition pythagorean_decomposition(const ContextColumn& contexts,
                                                   std::span<const double> y,
                                                   std::span<const double> h) {
    if (y.size() != h.size()) {
        throw DataError(fmt::format("pythagorean: {} outcomes vs {} predictions", y.size(),
                                    h.size()));
    }
    const auto rounded = rounded_by_group(contexts, h);
    const auto n = static_cast<double>(h.size());
    PythagoreanDecomposition out;
    out.total = kernels::parallel::sum_squared_diff(y, rounded) / n;
    out.forward_term = kernels::parallel::sum_squared_diff(y, h) / n;
    out.backward_term = kernels::parallel::sum_squared_diff(h, rounded) / n;
    out.residual = out.total - out.forward_term - out.backward_term;
    return out;
}

}  // namespace backaudit
