#include "backaudit/protocols.hpp"

#include <cmath>
#include <algorithm>
#include <exception>
#include <numeric>
#include <optional>
#include <sstream>

#include <fmt/format.h>

#include "backaudit/backward.hpp"
#include "backaudit/error.hpp"
#include "backaudit/groups.hpp"
#include "backaudit/rng.hpp"

namespace backaudit {

namespace {

constexpr std::uint64_t kInnerSplitStream = 0x1A2B;

// XYY scores against Y, so it needs the outcome as well as predictions.
bool needs_outcome(Protocol p) { return p != Protocol::WhatYYhat; }
bool needs_prediction(Protocol p) { return p != Protocol::WYY; }

// Column views shared by every seed of an audit.
struct PreparedAudit {
    ContextColumn contexts;
    std::span<const double> outcome;
    std::span<const double> prediction;
};

PreparedAudit prepare(const AuditTable& table, const RoleMap& roles,
                      std::span<const Protocol> protocols, LossKind kind) {
    PreparedAudit p{ContextColumn::from_table(table, roles.context_cols), {}, {}};
    bool want_outcome = false, want_prediction = false;
    for (auto proto : protocols) {
        check_roles(proto, roles);
        want_outcome |= needs_outcome(proto);
        want_prediction |= needs_prediction(proto);
    }
    if (want_outcome) {
        p.outcome = table.values(*roles.outcome_col);
        check_domain(kind, p.outcome, *roles.outcome_col);
    }
    if (want_prediction) {
        p.prediction = table.values(*roles.prediction_col);
        check_domain(kind, p.prediction, *roles.prediction_col);
    }
    return p;
}

ProtocolEvaluation fit_and_score(LossKind kind, const ContextColumn& all,
                                 std::span<const std::size_t> fit_rows,
                                 std::span<const double> fit_targets,
                                 std::span<const std::size_t> eval_rows,
                                 std::span<const double> eval_targets) {
    auto fitted = fit_group_predictor(kind, all.take(fit_rows), take_values(fit_targets, fit_rows));
    auto eval_ctx = all.take(eval_rows);
    auto targets = take_values(eval_targets, eval_rows);
    auto predicted = apply_group_predictor(fitted, eval_ctx);
    return {mean_loss(kind, predicted, targets), constant_baseline(kind, targets).loss,
            fit_rows.size(), eval_rows.size()};
}

ProtocolEvaluation evaluate_prepared(const PreparedAudit& p, Protocol protocol, LossKind kind,
                                     const SplitSpec& split) {
    const auto idx = split_indices(p.contexts.size(), split.test_fraction, split.seed);
    const auto& test = idx.test;
    switch (protocol) {
        case Protocol::XYY: {
            auto h = take_values(p.prediction, test);
            auto y = take_values(p.outcome, test);
            return {mean_loss(kind, h, y), constant_baseline(kind, y).loss, 0, test.size()};
        }
        case Protocol::WYY:
            return fit_and_score(kind, p.contexts, idx.train, p.outcome, test, p.outcome);
        case Protocol::WhatYY:
            return fit_and_score(kind, p.contexts, test, p.prediction, test, p.outcome);
        case Protocol::WYYhat:
            return fit_and_score(kind, p.contexts, test, p.outcome, test, p.prediction);
        case Protocol::WhatYYhat: {
            if (test.size() < 2) {
                throw DataError(fmt::format(
                    "protocol WhatYYhat: test split has {} row(s), cannot sub-split", test.size()));
            }
            const auto inner = split_indices(test.size(), split.inner_fraction,
                                             mix_seed(split.seed, kInnerSplitStream));
            std::vector<std::size_t> part_a, part_b;
            for (auto i : inner.train) part_a.push_back(test[i]);
            for (auto i : inner.test) part_b.push_back(test[i]);
            return fit_and_score(kind, p.contexts, part_a, p.prediction, part_b, p.prediction);
        }
    }
    throw ConfigError("unknown protocol");
}

}  // namespace

std::string_view to_string(Protocol p) {
    switch (p) {
        case Protocol::XYY: return "XYY";
        case Protocol::WYY: return "WYY";
        case Protocol::WhatYY: return "WhatYY";
        case Protocol::WYYhat: return "WYYhat";
        case Protocol::WhatYYhat: return "WhatYYhat";
    }
    return "?";
}

Protocol parse_protocol(std::string_view text) {
    for (auto p : kAllProtocols) {
        if (text == to_string(p)) return p;
    }
    if (text == "WŶY" || text == "WY^Y") return Protocol::WhatYY;
    if (text == "WYŶ" || text == "WYY^") return Protocol::WYYhat;
    if (text == "WŶŶ" || text == "WY^Y^") return Protocol::WhatYYhat;
    throw ConfigError(fmt::format(
        "unknown protocol '{}' (expected XYY, WYY, WhatYY, WYYhat, WhatYYhat)", text));
}

std::vector<Protocol> parse_protocol_list(std::string_view text) {
    if (text == "all") return {std::begin(kAllProtocols), std::end(kAllProtocols)};
    std::vector<Protocol> out;
    std::stringstream ss{std::string(text)};
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        Protocol p = parse_protocol(item);
        if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
    }
    if (out.empty()) throw ConfigError("no protocols selected");
    return out;
}

void check_roles(Protocol p, const RoleMap& roles) {
    if (roles.context_cols.empty()) {
        throw ConfigError(fmt::format("protocol {}: missing role 'context'", to_string(p)));
    }
    if (needs_outcome(p) && !roles.outcome_col) {
        throw ConfigError(fmt::format("protocol {}: missing role 'outcome'", to_string(p)));
    }
    if (needs_prediction(p) && !roles.prediction_col) {
        throw ConfigError(fmt::format("protocol {}: missing role 'prediction'", to_string(p)));
    }
}

ProtocolEvaluation evaluate_protocol(const AuditTable& table, const RoleMap& roles,
                                     Protocol protocol, LossKind kind, const SplitSpec& split) {
    split.validate();
    const Protocol one[] = {protocol};
    return evaluate_prepared(prepare(table, roles, one, kind), protocol, kind, split);
}

double run_protocol(const AuditTable& table, const RoleMap& roles, Protocol protocol,
                    LossKind kind, const SplitSpec& split) {
    return evaluate_protocol(table, roles, protocol, kind, split).loss;
}

double ProtocolResult::standard_error() const {
    if (per_seed_losses.empty()) return 0.0;
    return stddev / std::sqrt(static_cast<double>(per_seed_losses.size()));
}

void summarize(ProtocolResult& r) {
    const auto n = static_cast<double>(r.per_seed_losses.size());
    if (r.per_seed_losses.empty()) {
        r.mean = r.stddev = r.constant_reference = 0.0;
        return;
    }
    r.mean = std::accumulate(r.per_seed_losses.begin(), r.per_seed_losses.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : r.per_seed_losses) ss += (v - r.mean) * (v - r.mean);
    r.stddev = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
    r.constant_reference = std::accumulate(r.per_seed_constant_references.begin(),
                                           r.per_seed_constant_references.end(), 0.0) /
                           static_cast<double>(r.per_seed_constant_references.size());
}

double combined_standard_error(const ProtocolResult& a, const ProtocolResult& b) {
    const double sa = a.standard_error(), sb = b.standard_error();
    return std::sqrt(sa * sa + sb * sb);
}

std::vector<ProtocolResult> run_audit(const AuditTable& table, const RoleMap& roles,
                                      std::span<const Protocol> protocols, LossKind kind,
                                      std::span<const std::uint64_t> seeds,
                                      const SplitSpec& split) {
    if (seeds.empty()) throw ConfigError("audit: seed list is empty");
    if (protocols.empty()) throw ConfigError("audit: no protocols selected");
    split.validate();
    const PreparedAudit prepared = prepare(table, roles, protocols, kind);

    const std::size_t n_seeds = seeds.size();
    std::vector<std::vector<ProtocolEvaluation>> per_seed(n_seeds);
    std::vector<std::exception_ptr> failures(n_seeds);

#pragma omp parallel for schedule(dynamic)
    for (std::size_t s = 0; s < n_seeds; ++s) {
        try {
            SplitSpec spec = split;
            spec.seed = seeds[s];
            for (auto proto : protocols) {
                per_seed[s].push_back(evaluate_prepared(prepared, proto, kind, spec));
            }
        } catch (...) {
            failures[s] = std::current_exception();
        }
    }
    for (const auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }

    std::vector<ProtocolResult> results;
    for (std::size_t pi = 0; pi < protocols.size(); ++pi) {
        ProtocolResult r;
        r.protocol = protocols[pi];
        r.kind = kind;
        for (std::size_t s = 0; s < n_seeds; ++s) {
            r.per_seed_losses.push_back(per_seed[s][pi].loss);
            r.per_seed_constant_references.push_back(per_seed[s][pi].constant_reference);
        }
        summarize(r);
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace backaudit
