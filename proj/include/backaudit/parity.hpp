#pragma once

#include <span>
#include <vector>

#include "backaudit/groups.hpp"

namespace backaudit {

/// f_alpha = h - alpha * g_h(W), with g_h the in-sample group mean of h.
/// Values are signed and not clipped.
struct ResidualPredictorOutput {
    double alpha = 0.0;
    std::vector<double> values;
};

/// Throws ConfigError unless 0 <= alpha <= 1.
ResidualPredictorOutput residualize(const ContextColumn& contexts, std::span<const double> h,
                                    double alpha);

inline constexpr double kDefaultParityTolerance = 1e-9;

struct ParityCheck {
    /// Raw per-group means of the supplied column, by group id.
    std::vector<double> group_means;
    double max_group_mean_abs = 0.0;
    bool holds = false;
};

/// First-order parity in absolute terms: every group mean within
/// `tolerance` of zero.
ParityCheck first_order_parity_check(const ContextColumn& contexts,
                                     std::span<const double> values,
                                     double tolerance = kDefaultParityTolerance);

/// Mass-weighted variance of the per-group means of `values`.
double group_mean_dispersion(const ContextColumn& contexts, std::span<const double> values);

/// total = E[(Y - g_h)^2], forward_term = E[(Y - h)^2],
/// backward_term = E[(h - g_h)^2], residual = total - forward - backward.
/// The residual vanishes for weakly calibrated h.
struct PythagoreanDecomposition {
    double total = 0.0;
    double forward_term = 0.0;
    double backward_term = 0.0;
    double residual = 0.0;
};

PythagoreanDecomposition pythagorean_decomposition(const ContextColumn& contexts,
                                                   std::span<const double> y,
                                                   std::span<const double> h);

}  // namespace backaudit
