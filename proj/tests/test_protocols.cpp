#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "backaudit/error.hpp"
#include "backaudit/oracle.hpp"
#include "backaudit/protocols.hpp"
#include "backaudit/verify.hpp"

using namespace backaudit;

namespace {

// One 200k-row oracle sample shared across the tests in this file.
const AuditTable& reference_table() {
    static const AuditTable t = generate(reference_config(), 200000, 2024);
    return t;
}

RoleMap with_prediction(std::string col) {
    RoleMap r = oracle_roles(reference_config());
    r.prediction_col = std::move(col);
    return r;
}

}  // namespace

TEST(Protocols, ParseNamesAndAliases) {
    for (auto p : kAllProtocols) EXPECT_EQ(parse_protocol(to_string(p)), p);
    EXPECT_EQ(parse_protocol("WŶŶ"), Protocol::WhatYYhat);
    EXPECT_EQ(parse_protocol_list("all").size(), 5u);
    EXPECT_EQ(parse_protocol_list("WYY,XYY,WYY"),
              (std::vector<Protocol>{Protocol::WYY, Protocol::XYY}));
    EXPECT_THROW(parse_protocol("YYY"), ConfigError);
    EXPECT_THROW(parse_protocol_list(""), ConfigError);
}

TEST(Protocols, RoleRequirements) {
    RoleMap r;
    r.context_cols = {"w"};
    r.outcome_col = "y";
    EXPECT_NO_THROW(check_roles(Protocol::WYY, r));
    try {
        check_roles(Protocol::XYY, r);
        FAIL();
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("XYY"), std::string::npos);
        EXPECT_NE(msg.find("prediction"), std::string::npos);
    }
    r.outcome_col.reset();
    r.prediction_col = "p";
    EXPECT_NO_THROW(check_roles(Protocol::WhatYYhat, r));
    EXPECT_THROW(check_roles(Protocol::WhatYY, r), ConfigError);
    EXPECT_THROW(check_roles(Protocol::WYYhat, r), ConfigError);
}

TEST(Protocols, OracleValues) {
    SplitSpec split;
    split.seed = 7;
    const auto& t = reference_table();
    EXPECT_NEAR(run_protocol(t, with_prediction("bayes_class"), Protocol::WYY, LossKind::zero_one, split),
                0.4, 0.01);
    EXPECT_NEAR(run_protocol(t, with_prediction("bayes_class"), Protocol::XYY, LossKind::zero_one, split),
                0.3, 0.01);
    EXPECT_NEAR(run_protocol(t, with_prediction("bayes_score"), Protocol::XYY, LossKind::squared, split),
                0.2, 0.01);
    EXPECT_NEAR(run_protocol(t, with_prediction("bayes_score"), Protocol::WYY, LossKind::squared, split),
                0.24, 0.01);
}

TEST(Protocols, PureBackwardPredictionIsReconstructedExactly) {
    SplitSpec split;
    split.seed = 3;
    EXPECT_EQ(run_protocol(reference_table(), with_prediction("backward_class"), Protocol::WYYhat,
                           LossKind::zero_one, split),
              0.0);
}

TEST(Protocols, EvaluationReportsRowCounts) {
    SplitSpec split;
    split.seed = 1;
    AuditTable t({Column::discrete("w", {0, 0, 1, 1, 0, 1, 0, 1, 0, 1}),
                  Column::discrete("y", {0, 1, 1, 1, 0, 0, 0, 1, 1, 1}),
                  Column::discrete("p", {0, 0, 1, 1, 0, 1, 0, 1, 0, 1})});
    RoleMap r;
    r.context_cols = {"w"};
    r.outcome_col = "y";
    r.prediction_col = "p";
    auto e = evaluate_protocol(t, r, Protocol::WYY, LossKind::zero_one, split);
    EXPECT_EQ(e.fit_rows, 7u);
    EXPECT_EQ(e.eval_rows, 3u);
    auto inner = evaluate_protocol(t, r, Protocol::WhatYYhat, LossKind::zero_one, split);
    EXPECT_EQ(inner.fit_rows + inner.eval_rows, 3u);
}

TEST(Protocols, WhatYYhatNeedsTwoTestRows) {
    AuditTable t({Column::discrete("w", {0, 1}), Column::discrete("p", {0, 1})});
    RoleMap r;
    r.context_cols = {"w"};
    r.prediction_col = "p";
    EXPECT_THROW(run_protocol(t, r, Protocol::WhatYYhat, LossKind::zero_one, {}), DataError);
}

TEST(Protocols, DomainViolationIsDataError) {
    AuditTable t({Column::discrete("w", {0, 1, 0, 1}), Column::real("y", {0, 1, 0.5, 1}),
                  Column::discrete("p", {0, 1, 0, 1})});
    RoleMap r;
    r.context_cols = {"w"};
    r.outcome_col = "y";
    r.prediction_col = "p";
    EXPECT_THROW(run_protocol(t, r, Protocol::WYY, LossKind::zero_one, {}), DataError);
}

TEST(RunAudit, ShapeOrderAndDeterminism) {
    const auto& t = reference_table();
    const auto roles = with_prediction("bayes_class");
    std::vector<std::uint64_t> seeds = seed_range(1, 10);
    seeds[3] = seeds[7];
    const std::vector<Protocol> protocols{Protocol::XYY, Protocol::WYY};
    auto results = run_audit(t, roles, protocols, LossKind::zero_one, seeds);
    ASSERT_EQ(results.size(), 2u);
    for (const auto& r : results) {
        ASSERT_EQ(r.per_seed_losses.size(), 10u);
        EXPECT_EQ(r.per_seed_losses[3], r.per_seed_losses[7]);
    }
    const auto& xyy = results[0];
    const auto& wyy = results[1];
    EXPECT_EQ(xyy.protocol, Protocol::XYY);
    EXPECT_NEAR(wyy.mean - xyy.mean, 0.1, 0.01);
    EXPECT_LT(wyy.stddev, 0.01);
    EXPECT_LT(xyy.stddev, 0.01);

    SplitSpec single;
    single.seed = seeds[5];
    EXPECT_EQ(run_protocol(t, roles, Protocol::WYY, LossKind::zero_one, single),
              wyy.per_seed_losses[5]);

    auto again = run_audit(t, roles, protocols, LossKind::zero_one, seeds);
    EXPECT_EQ(again[1].per_seed_losses, wyy.per_seed_losses);
}

TEST(RunAudit, RequiresSeeds) {
    EXPECT_THROW(run_audit(reference_table(), with_prediction("bayes_class"),
                           std::vector<Protocol>{Protocol::WYY}, LossKind::zero_one, {}),
                 ConfigError);
}

TEST(ProtocolResult, SummaryStatistics) {
    ProtocolResult r;
    r.per_seed_losses = {0.1, 0.2, 0.3, 0.4};
    r.per_seed_constant_references = {0.5, 0.5, 0.5, 0.5};
    summarize(r);
    EXPECT_NEAR(r.mean, 0.25, 1e-15);
    EXPECT_NEAR(r.stddev, std::sqrt(0.05 / 3.0), 1e-15);
    EXPECT_NEAR(r.standard_error(), r.stddev / 2.0, 1e-15);
    EXPECT_EQ(r.constant_reference, 0.5);
    ProtocolResult s = r;
    EXPECT_NEAR(combined_standard_error(r, s), std::sqrt(2.0) * r.standard_error(), 1e-15);

    ProtocolResult one;
    one.per_seed_losses = {0.3};
    one.per_seed_constant_references = {0.4};
    summarize(one);
    EXPECT_EQ(one.stddev, 0.0);
}

TEST(ProtocolResult, PoolRunsConcatenatesSeeds) {
    const auto t1 = generate(reference_config(), 3000, 1);
    const auto t2 = generate(reference_config(), 3000, 2);
    const auto roles = oracle_roles(reference_config());
    const Protocol ps[] = {Protocol::XYY, Protocol::WYY};
    const std::uint64_t s1[] = {1}, s2[] = {2};
    const auto a = run_audit(t1, roles, ps, LossKind::zero_one, s1);
    const auto b = run_audit(t2, roles, ps, LossKind::zero_one, s2);
    const auto pooled = pool_runs({a, b});
    ASSERT_EQ(pooled.size(), 2u);
    for (std::size_t p = 0; p < 2; ++p) {
        EXPECT_EQ(pooled[p].protocol, ps[p]);
        ASSERT_EQ(pooled[p].per_seed_losses.size(), 2u);
        EXPECT_EQ(pooled[p].per_seed_losses[0], a[p].mean);
        EXPECT_EQ(pooled[p].per_seed_losses[1], b[p].mean);
        EXPECT_DOUBLE_EQ(pooled[p].mean, (a[p].mean + b[p].mean) / 2);
    }
    EXPECT_TRUE(pool_runs({}).empty());
    EXPECT_THROW(pool_runs({a, {b[0]}}), ConfigError);
}
