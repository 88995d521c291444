#include "backaudit/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "backaudit/error.hpp"
#include "backaudit/kernels.hpp"
#include "backaudit/losses.hpp"
#include "backaudit/rng.hpp"

namespace backaudit {

namespace {

void check_lengths(const ContextColumn& contexts, std::span<const double> y,
                   std::span<const double> h, const char* op) {
    if (contexts.size() == 0) throw DataError(fmt::format("{}: empty input", op));
    if (y.size() != contexts.size() || h.size() != contexts.size()) {
        throw DataError(fmt::format("{}: {} context rows, {} outcomes, {} predictions", op,
                                    contexts.size(), y.size(), h.size()));
    }
}

void check_binary(std::span<const double> y, std::span<const double> h) {
    check_domain(LossKind::zero_one, y, "outcome");
    check_domain(LossKind::zero_one, h, "prediction");
}

std::vector<kernels::GroupSums> sums_of(const ContextColumn& contexts, std::span<const double> y,
                                        std::span<const double> h) {
    return kernels::parallel::group_sums(contexts.ids(), contexts.n_groups(), y, h);
}

// Majority label from a count of ones; ties go to 0.
double majority(double ones, std::size_t count) {
    return 2.0 * ones > static_cast<double>(count) ? 1.0 : 0.0;
}

}  // namespace

GroupMoments compute_group_moments(const ContextColumn& contexts, std::span<const double> y,
                                   std::span<const double> h) {
    check_lengths(contexts, y, h, "group moments");
    const auto sums = sums_of(contexts, y, h);
    GroupMoments m;
    m.n = contexts.size();
    m.groups.resize(sums.size());
    const auto n = static_cast<double>(m.n);
    for (std::size_t g = 0; g < sums.size(); ++g) {
        const auto& s = sums[g];
        auto& e = m.groups[g];
        e.count = s.count;
        if (s.count == 0) continue;
        const auto c = static_cast<double>(s.count);
        e.mass = c / n;
        e.mean_y = s.sum_y / c;
        e.mean_h = s.sum_h / c;
        e.mean_yh = s.sum_yh / c;
        e.mean_y2 = s.sum_y2 / c;
        e.mean_h2 = s.sum_h2 / c;
    }
    return m;
}

ConfidenceCheck check_confidence(const ContextColumn& contexts, std::span<const double> y,
                                 std::span<const double> h) {
    check_lengths(contexts, y, h, "confidence");
    check_binary(y, h);
    const auto sums = sums_of(contexts, y, h);
    ConfidenceCheck out;
    out.group_margins.assign(sums.size(), 0.0);
    out.confident_in_every_group = true;
    double h_agree = 0.0, y_agree = 0.0;
    for (std::size_t g = 0; g < sums.size(); ++g) {
        const auto& s = sums[g];
        if (s.count == 0) continue;
        const auto c = static_cast<double>(s.count);
        const bool gstar_one = majority(s.sum_y, s.count) == 1.0;
        const double y_hits = gstar_one ? s.sum_y : c - s.sum_y;
        const double h_hits = gstar_one ? s.sum_h : c - s.sum_h;
        h_agree += h_hits;
        y_agree += y_hits;
        out.group_margins[g] = (h_hits - y_hits) / c;
        if (h_hits < y_hits) out.confident_in_every_group = false;
    }
    out.margin = (h_agree - y_agree) / static_cast<double>(contexts.size());
    out.confident = h_agree >= y_agree;
    return out;
}

WeakCalibration check_weak_calibration(const GroupMoments& moments, double tolerance) {
    WeakCalibration out;
    out.tolerance = tolerance;
    for (const auto& e : moments.groups) {
        out.first_moment_residual += e.mass * std::abs(e.mean_y - e.mean_h);
        out.second_moment_residual += e.mass * std::abs(e.mean_yh - e.mean_h2);
    }
    out.calibrated =
        out.first_moment_residual <= tolerance && out.second_moment_residual <= tolerance;
    return out;
}

double conditional_covariance(const GroupMoments& moments) {
    double total = 0.0;
    for (const auto& e : moments.groups) total += e.mass * e.cov();
    return total;
}

ClassificationBounds prop3_classification_bounds(const ContextColumn& contexts,
                                                 std::span<const double> y,
                                                 std::span<const double> h) {
    check_lengths(contexts, y, h, "classification bounds");
    check_binary(y, h);
    const auto moments = compute_group_moments(contexts, y, h);
    ClassificationBounds out;
    out.cov_le_var_h_margin = INFINITY;
    out.var_h_le_var_y_margin = INFINITY;
    for (const auto& e : moments.groups) {
        if (e.count == 0) continue;
        const double var_h = e.var_h();
        const double var_y = e.var_y();
        const double cov = e.cov();
        const double rounded = majority(e.mean_h * static_cast<double>(e.count), e.count);
        const double loss = rounded == 1.0 ? 1.0 - e.mean_h : e.mean_h;
        out.cov += e.mass * cov;
        out.var_h += e.mass * var_h;
        out.var_y += e.mass * var_y;
        out.rounding_loss += e.mass * loss;
        out.identity_residual += e.mass * std::abs(var_h - loss * (1.0 - loss));
        out.cov_le_var_h_margin = std::min(out.cov_le_var_h_margin, var_h - cov);
        out.var_h_le_var_y_margin = std::min(out.var_h_le_var_y_margin, var_y - var_h);
    }
    // Slack below float noise counts as equality.
    constexpr double kSlack = 1e-12;
    out.chain_holds = out.cov_le_var_h_margin >= -kSlack && out.var_h_le_var_y_margin >= -kSlack;
    out.confident = check_confidence(contexts, y, h).confident;
    return out;
}

RegressionEqualities prop3_regression_equalities(const ContextColumn& contexts,
                                                 std::span<const double> y,
                                                 std::span<const double> h) {
    check_lengths(contexts, y, h, "regression equalities");
    check_domain(LossKind::squared, y, "outcome");
    check_domain(LossKind::squared, h, "prediction");
    const auto moments = compute_group_moments(contexts, y, h);

    std::vector<double> mean_h(moments.groups.size()), mean_y(moments.groups.size());
    for (std::size_t g = 0; g < moments.groups.size(); ++g) {
        mean_h[g] = moments.groups[g].mean_h;
        mean_y[g] = moments.groups[g].mean_y;
    }
    const std::size_t n = contexts.size();
    std::vector<double> rounded(n), gstar(n);
    kernels::parallel::gather(contexts.ids(), mean_h, rounded);
    kernels::parallel::gather(contexts.ids(), mean_y, gstar);

    const auto nd = static_cast<double>(n);
    const double h_vs_rounded = kernels::parallel::sum_squared_diff(h, rounded) / nd;
    const double y_vs_gstar = kernels::parallel::sum_squared_diff(y, gstar) / nd;
    const double y_vs_h = kernels::parallel::sum_squared_diff(y, h) / nd;
    const double y_vs_rounded = kernels::parallel::sum_squared_diff(y, rounded) / nd;

    RegressionEqualities out;
    out.lhs = h_vs_rounded;
    out.mid = y_vs_gstar - y_vs_h;
    out.rhs = conditional_covariance(moments);
    out.rounding_gap = y_vs_rounded - y_vs_h;
    out.decomposition_residual = std::abs(out.rounding_gap - (2.0 * out.rhs - out.lhs));
    return out;
}

ResampledBaseline resampled_baseline(const ContextColumn& contexts, std::span<const double> y,
                                     std::span<const double> h, std::uint64_t seed) {
    check_lengths(contexts, y, h, "resampled baseline");
    check_binary(y, h);
    const auto sums = sums_of(contexts, y, h);
    std::vector<double> rate(sums.size(), 0.0);
    for (std::size_t g = 0; g < sums.size(); ++g) {
        if (sums[g].count > 0) rate[g] = sums[g].sum_y / static_cast<double>(sums[g].count);
    }
    std::mt19937_64 rng(seed);
    std::size_t mismatches = 0;
    const auto ids = contexts.ids();
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const double redrawn = uniform01(rng) < rate[ids[i]] ? 1.0 : 0.0;
        mismatches += (redrawn != h[i]);
    }
    ResampledBaseline out;
    out.loss_resampled = static_cast<double>(mismatches) / static_cast<double>(ids.size());
    out.gap = out.loss_resampled - mean_loss(LossKind::zero_one, h, y);
    return out;
}

IndependenceScores independence_scores(const ContextColumn& contexts, std::span<const double> y,
                                       std::span<const double> h) {
    check_lengths(contexts, y, h, "independence scores");
    const bool binary =
        std::all_of(h.begin(), h.end(), [](double v) { return v == 0.0 || v == 1.0; });
    const int levels = binary ? 2 : kIndependenceLevels;
    auto level_of = [&](double v) {
        if (binary) return static_cast<int>(v);
        const int l = static_cast<int>(std::floor(v * kIndependenceLevels));
        return std::clamp(l, 0, kIndependenceLevels - 1);
    };

    const std::size_t n_groups = contexts.n_groups();
    std::vector<std::size_t> counts(n_groups * levels, 0), group_total(n_groups, 0),
        marginal(levels, 0);
    const auto ids = contexts.ids();
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const int l = level_of(h[i]);
        ++counts[ids[i] * levels + l];
        ++group_total[ids[i]];
        ++marginal[l];
    }

    IndependenceScores out;
    const auto n = static_cast<double>(ids.size());
    for (std::size_t g = 0; g < n_groups; ++g) {
        if (group_total[g] == 0) continue;
        double tv = 0.0;
        for (int l = 0; l < levels; ++l) {
            const double p_group =
                static_cast<double>(counts[g * levels + l]) / static_cast<double>(group_total[g]);
            tv += std::abs(p_group - static_cast<double>(marginal[l]) / n);
        }
        out.forward_score = std::max(out.forward_score, 0.5 * tv);
    }
    const auto moments = compute_group_moments(contexts, y, h);
    for (const auto& e : moments.groups) out.backward_score += e.mass * std::abs(e.cov());
    return out;
}

}  // namespace backaudit
