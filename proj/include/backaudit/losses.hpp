#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace backaudit {

enum class LossKind { zero_one, squared };

std::string_view to_string(LossKind kind);
/// Accepts "zero_one" or "squared"; throws ConfigError otherwise.
LossKind parse_loss_kind(std::string_view text);

/// Throws DataError unless every value is in {0,1} (zero_one) or in [0,1]
/// (squared). `what` names the column in the message.
void check_domain(LossKind kind, std::span<const double> values, std::string_view what);

/// Mismatch rate (zero_one) or mean squared difference (squared).
double mean_loss(LossKind kind, std::span<const double> predictions,
                 std::span<const double> targets);

struct ConstantBaseline {
    double value = 0.0;
    double loss = 0.0;
};

/// Best single prediction for `targets` and its loss. Zero-one ties go to
/// label 0; squared loss uses the sample mean (loss is the 1/n variance).
ConstantBaseline constant_baseline(LossKind kind, std::span<const double> targets);

struct RocPoint {
    double false_positive_rate = 0.0;
    double true_positive_rate = 0.0;

    friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

/// Sweeps thresholds over the distinct scores in descending order; the curve
/// starts at (0,0) and ends at (1,1). Throws DiagnosticError if `labels`
/// holds a single class.
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const double> labels);

/// Trapezoidal area under a curve produced by roc_curve.
double roc_auc(std::span<const RocPoint> curve);

}  // namespace backaudit
