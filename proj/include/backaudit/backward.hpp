#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "backaudit/groups.hpp"
#include "backaudit/losses.hpp"

namespace backaudit {

/// Group-conditional optimal predictor from context to a prediction value.
/// Fitted on outcomes it is the backward prediction baseline; fitted on a
/// model's own outputs it is the backward-rounded predictor.
struct GroupPredictor {
    struct Entry {
        double value = 0.0;
        std::size_t support = 0;
        std::string label;
    };

    LossKind kind = LossKind::zero_one;
    std::map<GroupKey, Entry> table;
    /// Constant-optimal value of the training targets; used for unseen keys.
    double fallback = 0.0;

    double predict(const GroupKey& key) const;
};

/// Per-group majority label (ties to 0) for zero_one, per-group mean for
/// squared. Throws DataError on empty or mismatched input.
GroupPredictor fit_group_predictor(LossKind kind, const ContextColumn& contexts,
                                   std::span<const double> targets);

/// Looks every row up by its group key; unseen keys get the fallback.
std::vector<double> apply_group_predictor(const GroupPredictor& g, const ContextColumn& contexts);

}  // namespace backaudit
