#include "backaudit/backward.hpp"

#include <fmt/format.h>

#include "backaudit/error.hpp"
#include "backaudit/kernels.hpp"

namespace backaudit {

double GroupPredictor::predict(const GroupKey& key) const {
    auto it = table.find(key);
    return it == table.end() ? fallback : it->second.value;
}

GroupPredictor fit_group_predictor(LossKind kind, const ContextColumn& contexts,
                                   std::span<const double> targets) {
    if (targets.empty()) throw DataError("fit: empty input");
    if (contexts.size() != targets.size()) {
        throw DataError(fmt::format("fit: {} context rows vs {} targets", contexts.size(),
                                    targets.size()));
    }
    check_domain(kind, targets, "fit targets");

    const auto sums =
        kernels::parallel::group_sums(contexts.ids(), contexts.n_groups(), targets, targets);

    GroupPredictor g;
    g.kind = kind;
    g.fallback = constant_baseline(kind, targets).value;
    for (std::size_t id = 0; id < sums.size(); ++id) {
        const auto& s = sums[id];
        if (s.count == 0) continue;
        GroupPredictor::Entry e;
        e.support = s.count;
        e.label = contexts.labels()[id];
        if (kind == LossKind::zero_one) {
            // sum_y counts ones exactly for binary targets.
            e.value = 2.0 * s.sum_y > static_cast<double>(s.count) ? 1.0 : 0.0;
        } else {
            e.value = s.sum_y / static_cast<double>(s.count);
        }
        g.table.emplace(contexts.keys()[id], std::move(e));
    }
    return g;
}

std::vector<double> apply_group_predictor(const GroupPredictor& g, const ContextColumn& contexts) {
    std::vector<double> lookup(contexts.n_groups());
    for (std::size_t id = 0; id < lookup.size(); ++id) lookup[id] = g.predict(contexts.keys()[id]);
    std::vector<double> out(contexts.size());
    kernels::parallel::gather(contexts.ids(), lookup, out);
    return out;
}

}  // namespace backaudit
