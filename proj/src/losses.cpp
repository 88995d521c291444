#include "backaudit/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "backaudit/error.hpp"
#include "backaudit/kernels.hpp"

namespace backaudit {

std::string_view to_string(LossKind kind) {
    return kind == LossKind::zero_one ? "zero_one" : "squared";
}

LossKind parse_loss_kind(std::string_view text) {
    if (text == "zero_one") return LossKind::zero_one;
    if (text == "squared") return LossKind::squared;
    throw ConfigError(fmt::format("unknown loss '{}' (expected zero_one or squared)", text));
}

void check_domain(LossKind kind, std::span<const double> values, std::string_view what) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        const bool ok = kind == LossKind::zero_one ? (v == 0.0 || v == 1.0)
                                                   : (std::isfinite(v) && v >= 0.0 && v <= 1.0);
        if (!ok) {
            throw DataError(fmt::format("{}: value {} at row {} is outside the {} domain", what, v,
                                        i, kind == LossKind::zero_one ? "{0,1}" : "[0,1]"));
        }
    }
}

double mean_loss(LossKind kind, std::span<const double> predictions,
                 std::span<const double> targets) {
    if (predictions.size() != targets.size()) {
        throw DataError(fmt::format("loss: {} predictions vs {} targets", predictions.size(),
                                    targets.size()));
    }
    if (targets.empty()) throw DataError("loss: empty columns");
    check_domain(kind, predictions, "predictions");
    check_domain(kind, targets, "targets");
    const auto n = static_cast<double>(targets.size());
    if (kind == LossKind::zero_one) {
        return static_cast<double>(kernels::parallel::count_mismatches(predictions, targets)) / n;
    }
    return kernels::parallel::sum_squared_diff(predictions, targets) / n;
}

ConstantBaseline constant_baseline(LossKind kind, std::span<const double> targets) {
    if (targets.empty()) throw DataError("constant baseline: empty targets");
    check_domain(kind, targets, "targets");
    const auto n = static_cast<double>(targets.size());
    if (kind == LossKind::zero_one) {
        const auto ones = static_cast<std::size_t>(
            std::count(targets.begin(), targets.end(), 1.0));
        const auto zeros = targets.size() - ones;
        if (ones > zeros) return {1.0, static_cast<double>(zeros) / n};
        return {0.0, static_cast<double>(ones) / n};
    }
    const double mean = std::accumulate(targets.begin(), targets.end(), 0.0) / n;
    double ss = 0.0;
    for (double t : targets) ss += (t - mean) * (t - mean);
    return {mean, ss / n};
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const double> labels) {
    if (scores.size() != labels.size()) {
        throw DataError(fmt::format("roc: {} scores vs {} labels", scores.size(), labels.size()));
    }
    check_domain(LossKind::zero_one, labels, "roc labels");
    const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1.0));
    const std::size_t negatives = labels.size() - positives;
    if (positives == 0 || negatives == 0) {
        throw DiagnosticError("roc: labels contain a single class, curve undefined");
    }

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    std::vector<RocPoint> curve{{0.0, 0.0}};
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        const double threshold = scores[order[i]];
        for (; i < order.size() && scores[order[i]] == threshold; ++i) {
            if (labels[order[i]] == 1.0) {
                ++tp;
            } else {
                ++fp;
            }
        }
        curve.push_back({static_cast<double>(fp) / static_cast<double>(negatives),
                         static_cast<double>(tp) / static_cast<double>(positives)});
    }
    return curve;
}

double roc_auc(std::span<const RocPoint> curve) {
    double area = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        const double dx = curve[i].false_positive_rate - curve[i - 1].false_positive_rate;
        area += dx * 0.5 * (curve[i].true_positive_rate + curve[i - 1].true_positive_rate);
    }
    return area;
}

}  // namespace backaudit
