#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "backaudit/groups.hpp"

namespace backaudit {

/// Exact empirical per-group moments of an outcome y and a predictor h.
struct GroupMoments {
    struct Entry {
        std::size_t count = 0;
        double mass = 0.0;
        double mean_y = 0.0;
        double mean_h = 0.0;
        double mean_yh = 0.0;
        double mean_y2 = 0.0;
        double mean_h2 = 0.0;

        double cov() const { return mean_yh - mean_y * mean_h; }
        double var_y() const { return mean_y2 - mean_y * mean_y; }
        double var_h() const { return mean_h2 - mean_h * mean_h; }
    };

    /// Indexed by the context column's group id; groups absent from the
    /// sample have count 0 and mass 0.
    std::vector<Entry> groups;
    std::size_t n = 0;
};

GroupMoments compute_group_moments(const ContextColumn& contexts, std::span<const double> y,
                                   std::span<const double> h);

struct ConfidenceCheck {
    bool confident = false;
    /// Pr[h = g*] - Pr[Y = g*]
    double margin = 0.0;
    /// The same margin within each group (by group id; 0 for empty groups).
    std::vector<double> group_margins;
    bool confident_in_every_group = false;
};

/// g* is fitted in-sample from (contexts, y) under zero-one loss.
ConfidenceCheck check_confidence(const ContextColumn& contexts, std::span<const double> y,
                                 std::span<const double> h);

inline constexpr double kDefaultCalibrationTolerance = 0.01;

struct WeakCalibration {
    bool calibrated = false;
    /// Mass-weighted mean |E[Y|W] - E[h|W]|.
    double first_moment_residual = 0.0;
    /// Mass-weighted mean |E[Yh|W] - E[h^2|W]|.
    double second_moment_residual = 0.0;
    double tolerance = kDefaultCalibrationTolerance;
};

WeakCalibration check_weak_calibration(const GroupMoments& moments,
                                       double tolerance = kDefaultCalibrationTolerance);

/// E_W[Cov(Y, h | W)]
double conditional_covariance(const GroupMoments& moments);

/// Bernoulli variance chain for binary h, aggregated over groups by mass:
///   Cov(h,Y|W) <= Var(h|W) = l_W (1 - l_W) <= Var(Y|W)
/// where l_W is the in-sample backward rounding loss. The inequalities are
/// only guaranteed when h is confident; `confident` reports that status.
struct ClassificationBounds {
    double cov = 0.0;
    double var_h = 0.0;
    double rounding_loss = 0.0;
    double identity_residual = 0.0;
    double var_y = 0.0;
    /// Smallest per-group slack of each inequality (negative = violated).
    double cov_le_var_h_margin = 0.0;
    double var_h_le_var_y_margin = 0.0;
    bool chain_holds = false;
    bool confident = false;
};

ClassificationBounds prop3_classification_bounds(const ContextColumn& contexts,
                                                 std::span<const double> y,
                                                 std::span<const double> h);

/// lhs = E[(h - g_h)^2], mid = E[(Y - g*)^2] - E[(Y - h)^2],
/// rhs = E_W[Cov(Y,h|W)], with g_h and g* the in-sample group means.
/// The three agree when h is weakly calibrated. Without calibration the
/// two-term identity E[(Y-g_h)^2] - E[(Y-h)^2] = 2 rhs - lhs still holds;
/// `decomposition_residual` is its absolute error.
struct RegressionEqualities {
    double lhs = 0.0;
    double mid = 0.0;
    double rhs = 0.0;
    double rounding_gap = 0.0;
    double decomposition_residual = 0.0;
};

RegressionEqualities prop3_regression_equalities(const ContextColumn& contexts,
                                                 std::span<const double> y,
                                                 std::span<const double> h);

struct ResampledBaseline {
    double loss_resampled = 0.0;
    double gap = 0.0;
};

/// Redraws each outcome from its group's empirical label frequency and
/// scores h against the redrawn labels. In expectation the gap equals
/// 2 E_W[Cov(Y,h|W)].
ResampledBaseline resampled_baseline(const ContextColumn& contexts, std::span<const double> y,
                                     std::span<const double> h, std::uint64_t seed);

inline constexpr int kIndependenceLevels = 16;

struct IndependenceScores {
    /// Max over groups of the total-variation distance between the group's
    /// distribution of h and the marginal. 0 for a pure forward predictor.
    double forward_score = 0.0;
    /// Mass-weighted mean |Cov(y,h|W)|. 0 for a pure backward predictor.
    double backward_score = 0.0;
};

/// Binary h is compared on its two values; any other h is binned into
/// kIndependenceLevels equal-width levels over [0,1].
IndependenceScores independence_scores(const ContextColumn& contexts, std::span<const double> y,
                                       std::span<const double> h);

/// Audit-level summary; absent parts could not be computed from the roles
/// supplied (e.g. classification checks need binary predictions).
struct DiagnosticReport {
    std::optional<ConfidenceCheck> confidence;
    std::optional<ClassificationBounds> classification;
    std::optional<ResampledBaseline> resampled;
    std::optional<WeakCalibration> weak_calibration;
    std::optional<double> expected_conditional_covariance;
    std::optional<RegressionEqualities> regression;
    /// (Pythagorean residual, two-term decomposition residual)
    std::optional<std::pair<double, double>> pythagorean_residuals;
    std::optional<IndependenceScores> independence;
};

}  // namespace backaudit
