#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "backaudit/backward.hpp"
#include "backaudit/error.hpp"
#include "backaudit/groups.hpp"
#include "backaudit/oracle.hpp"
#include "backaudit/table.hpp"

using namespace backaudit;

namespace {

ContextColumn ctx(std::vector<std::uint32_t> codes) { return ContextColumn::from_codes(codes); }

GroupKey key(std::uint32_t c) { return GroupKey{{c}}; }

}  // namespace

TEST(FitGroupPredictor, UnanimousGroups) {
    std::vector<double> t{1, 1, 0};
    auto g = fit_group_predictor(LossKind::zero_one, ctx({0, 0, 1}), t);
    EXPECT_EQ(g.predict(key(0)), 1.0);
    EXPECT_EQ(g.predict(key(1)), 0.0);
    EXPECT_EQ(g.fallback, 1.0);
    EXPECT_EQ(g.table.at(key(0)).support, 2u);
}

TEST(FitGroupPredictor, TieGoesToZero) {
    std::vector<double> t{0, 1};
    auto g = fit_group_predictor(LossKind::zero_one, ctx({0, 0}), t);
    EXPECT_EQ(g.predict(key(0)), 0.0);
}

TEST(FitGroupPredictor, SquaredUsesGroupMeans) {
    std::vector<double> t{0.2, 0.6, 0.4, 0.8};
    auto g = fit_group_predictor(LossKind::squared, ctx({0, 0, 1, 1}), t);
    EXPECT_NEAR(g.predict(key(0)), 0.4, 1e-15);
    EXPECT_NEAR(g.predict(key(1)), 0.6, 1e-15);
    EXPECT_NEAR(g.fallback, 0.5, 1e-15);
}

TEST(FitGroupPredictor, Errors) {
    std::vector<double> t{1};
    EXPECT_THROW(fit_group_predictor(LossKind::zero_one, ctx({0, 1}), t), DataError);
}

TEST(ApplyGroupPredictor, LookupAndFallback) {
    GroupPredictor g;
    g.table[key(0)] = {1.0, 1, "a"};
    g.fallback = 0.0;
    auto keys = std::vector<GroupKey>{key(0), key(0)};
    EXPECT_EQ(apply_group_predictor(g, ContextColumn::from_keys(keys)),
              (std::vector<double>{1, 1}));
    auto unseen = std::vector<GroupKey>{key(2)};
    EXPECT_EQ(apply_group_predictor(g, ContextColumn::from_keys(unseen)),
              (std::vector<double>{0}));
}

TEST(ApplyGroupPredictor, OracleBaselineLoss) {
    const auto cfg = reference_config();
    const auto table = generate(cfg, 200000, 31);
    const auto roles = oracle_roles(cfg);
    const auto contexts = ContextColumn::from_table(table, roles.context_cols);
    const auto& y = table.values("y");
    auto g = fit_group_predictor(LossKind::zero_one, contexts, y);
    auto pred = apply_group_predictor(g, contexts);
    EXPECT_NEAR(mean_loss(LossKind::zero_one, pred, y), 0.4, 0.01);
}

TEST(GroupPredictorProperties, PureBackwardAndOptimal) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng() % 300;
        const std::uint32_t groups = 1 + static_cast<std::uint32_t>(rng() % 6);
        std::vector<std::uint32_t> codes(n);
        std::vector<double> bin(n), real(n);
        for (std::size_t i = 0; i < n; ++i) {
            codes[i] = static_cast<std::uint32_t>(rng() % groups);
            bin[i] = static_cast<double>(rng() % 2);
            real[i] = u(rng);
        }
        const auto c = ctx(codes);
        for (auto [kind, targets] : {std::pair{LossKind::zero_one, &bin},
                                     std::pair{LossKind::squared, &real}}) {
            auto g = fit_group_predictor(kind, c, *targets);
            auto pred = apply_group_predictor(g, c);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = i + 1; j < n; ++j) {
                    if (codes[i] == codes[j]) ASSERT_EQ(pred[i], pred[j]);
                }
            }
            const double fitted = mean_loss(kind, pred, *targets);

            GroupPredictor other = g;
            auto& entry = other.table.begin()->second;
            entry.value = kind == LossKind::zero_one ? 1.0 - entry.value : u(rng);
            ASSERT_GE(mean_loss(kind, apply_group_predictor(other, c), *targets), fitted - 1e-15);

            // Any group map, not only a one-group perturbation.
            for (auto& [k, e] : other.table) {
                e.value = kind == LossKind::zero_one ? static_cast<double>(rng() % 2) : u(rng);
            }
            ASSERT_GE(mean_loss(kind, apply_group_predictor(other, c), *targets), fitted - 1e-15);
        }
    }
}

TEST(ContextColumn, MultiColumnKeysAreLexicographic) {
    AuditTable t({Column::discrete("a", {1, 0, 1, 0}), Column::categorical("b", {1, 1, 0, 0}, {"x", "y"})});
    std::vector<std::string> cols{"a", "b"};
    auto c = ContextColumn::from_table(t, cols);
    ASSERT_EQ(c.n_groups(), 4u);
    for (std::size_t i = 1; i < c.keys().size(); ++i) EXPECT_LT(c.keys()[i - 1], c.keys()[i]);
    EXPECT_EQ(c.labels()[c.ids()[0]], "1|y");
    auto sub = c.take(std::vector<std::size_t>{2, 3});
    EXPECT_EQ(sub.n_groups(), 4u);
    EXPECT_EQ(sub.key_of_row(0), c.key_of_row(2));
}
