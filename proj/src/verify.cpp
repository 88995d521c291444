#include "backaudit/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "backaudit/diagnostics.hpp"
#include "backaudit/error.hpp"
#include "backaudit/kernels.hpp"
#include "backaudit/parity.hpp"
#include "backaudit/protocols.hpp"
#include "backaudit/rng.hpp"

namespace backaudit {

std::vector<std::uint64_t> seed_range(std::uint64_t base, int count) {
    std::vector<std::uint64_t> out;
    for (int i = 0; i < count; ++i) out.push_back(base + static_cast<std::uint64_t>(i));
    return out;
}

std::vector<ProtocolResult> pool_runs(const std::vector<std::vector<ProtocolResult>>& runs) {
    if (runs.empty()) return {};
    std::vector<ProtocolResult> out;
    for (const auto& first : runs.front()) {
        ProtocolResult r;
        r.protocol = first.protocol;
        r.kind = first.kind;
        out.push_back(r);
    }
    for (const auto& run : runs) {
        if (run.size() != out.size()) throw ConfigError("pool_runs: runs disagree on protocols");
        for (std::size_t p = 0; p < run.size(); ++p) {
            auto& dst = out[p];
            dst.per_seed_losses.insert(dst.per_seed_losses.end(), run[p].per_seed_losses.begin(),
                                       run[p].per_seed_losses.end());
            dst.per_seed_constant_references.insert(dst.per_seed_constant_references.end(),
                                                    run[p].per_seed_constant_references.begin(),
                                                    run[p].per_seed_constant_references.end());
        }
    }
    for (auto& r : out) summarize(r);
    return out;
}

MeanSe mean_se(std::span<const double> xs) {
    MeanSe out;
    if (xs.empty()) return out;
    const auto n = static_cast<double>(xs.size());
    out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    if (xs.size() < 2) return out;
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.se = std::sqrt(ss / (n - 1)) / std::sqrt(n);
    return out;
}

bool rounded_constant_up_to_noise(const ContextColumn& contexts, std::span<const double> h) {
    const auto pooled = constant_baseline(LossKind::zero_one, h).value;
    const auto sums =
        kernels::parallel::group_sums(contexts.ids(), contexts.n_groups(), h, h);
    for (const auto& s : sums) {
        if (s.count == 0) continue;
        const auto c = static_cast<double>(s.count);
        const double value = 2.0 * s.sum_y > c ? 1.0 : 0.0;
        if (value == pooled) continue;
        const double rate = s.sum_y / c;
        if (std::abs(rate - 0.5) > 3.0 * std::sqrt(0.25 / c)) return false;
    }
    return true;
}

namespace {

constexpr std::uint64_t kDataStream = 0xDA7A;

class ClaimLog {
public:
    void add(std::string name, bool passed, double observed, double bound, std::string detail = {}) {
        claims_.push_back({std::move(name), passed, observed, bound, std::move(detail)});
    }
    /// observed <= bound
    void at_most(std::string name, double observed, double bound, std::string detail = {}) {
        add(std::move(name), observed <= bound, observed, bound, std::move(detail));
    }
    std::vector<ClaimResult> take() { return std::move(claims_); }

private:
    std::vector<ClaimResult> claims_;
};

RoleMap with_prediction(RoleMap roles, const std::string& column) {
    roles.prediction_col = column;
    return roles;
}

const ProtocolResult& find(const std::vector<ProtocolResult>& rs, Protocol p) {
    return *std::find_if(rs.begin(), rs.end(), [&](const ProtocolResult& r) { return r.protocol == p; });
}

// Zero-one prediction column given by a group -> label map.
Column group_map_column(const std::string& name, std::span<const double> w,
                        const std::vector<double>& labels) {
    std::vector<double> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = labels[static_cast<std::size_t>(w[i])];
    return Column::discrete(name, std::move(out));
}

bool same_table(const GroupPredictor& a, const GroupPredictor& b) {
    if (a.table.size() != b.table.size()) return false;
    for (const auto& [key, entry] : a.table) {
        auto it = b.table.find(key);
        if (it == b.table.end() || it->second.value != entry.value) return false;
    }
    return true;
}

void sweep_basic_properties(const VerifyOptions& opt, ClaimLog& log) {
    std::mt19937_64 rng(mix_seed(opt.seed_base, 0x5EE9));
    const auto seeds = seed_range(opt.seed_base, opt.seeds);
    int fail_a = 0, fail_b = 0;
    double worst_a = -INFINITY, worst_b = -INFINITY;
    const Protocol xyy_wyy[] = {Protocol::XYY, Protocol::WYY};
    for (int i = 0; i < opt.sweep_configs; ++i) {
        const OracleConfig cfg = random_config(rng);
        std::vector<double> random_map(cfg.groups());
        for (auto& v : random_map) v = uniform01(rng) < 0.5 ? 0.0 : 1.0;
        const auto roles = oracle_roles(cfg);

        // One fresh sample per seed: a group whose rate sits next to 1/2 can
        // flip its sample majority, and only resampling puts that in the SE.
        std::vector<std::vector<ProtocolResult>> backward_runs, mapped_runs;
        for (auto s : seeds) {
            AuditTable t = generate(cfg, opt.sweep_n, mix_seed(mix_seed(opt.seed_base, 1000 + i), s));
            t = t.with_column(group_map_column("random_map", t.values("w"), random_map));
            const std::uint64_t one[] = {s};
            backward_runs.push_back(run_audit(t, with_prediction(roles, "backward_class"), xyy_wyy,
                                              LossKind::zero_one, one));
            mapped_runs.push_back(run_audit(t, with_prediction(roles, "random_map"), xyy_wyy,
                                            LossKind::zero_one, one));
        }
        const auto backward = pool_runs(backward_runs);
        const auto mapped = pool_runs(mapped_runs);
        const auto& wyy = find(backward, Protocol::WYY);
        // (a) XYY(g*) <= WYY + 3 SE
        const auto& xa = find(backward, Protocol::XYY);
        const double excess_a = xa.mean - wyy.mean - 3.0 * combined_standard_error(xa, wyy);
        worst_a = std::max(worst_a, excess_a);
        fail_a += excess_a > 0.0;
        // (b) XYY(any group map) >= WYY - 3 SE
        const auto& xb = find(mapped, Protocol::XYY);
        const double excess_b = wyy.mean - xb.mean - 3.0 * combined_standard_error(xb, wyy);
        worst_b = std::max(worst_b, excess_b);
        fail_b += excess_b > 0.0;
    }
    log.add("g_star_optimal_sweep: XYY(g*) <= WYY + 3SE over random configs", fail_a == 0, worst_a, 0.0,
            fmt::format("{} of {} configs violated", fail_a, opt.sweep_configs));
    log.add("group_map_floor_sweep: XYY(group map) >= WYY - 3SE over random configs", fail_b == 0, worst_b,
            0.0, fmt::format("{} of {} configs violated", fail_b, opt.sweep_configs));
}

}  // namespace

std::vector<ClaimResult> run_verification(const VerifyOptions& opt) {
    if (opt.n < 2) throw DataError("verify: n must be at least 2");
    if (opt.seeds < 2) throw ConfigError("verify: at least two seeds are needed for error bars");
    ClaimLog log;
    const OracleConfig cfg = reference_config();
    const OracleAnalytics a = analyze(cfg);
    OracleConfig gen_cfg = cfg;
    for (auto& q : gen_cfg.outcome_probs[0]) q = std::clamp(q + opt.perturb_q, 0.0, 1.0);

    const auto seeds = seed_range(opt.seed_base, opt.seeds);
    const RoleMap roles = oracle_roles(cfg);
    std::vector<AuditTable> data;
    for (auto s : seeds) data.push_back(generate(gen_cfg, opt.n, mix_seed(s, kDataStream)));
    const AuditTable& t = data.front();

    // Convergence of the protocols to the enumerated population values.
    const double n_test = static_cast<double>(held_out_count(opt.n, SplitSpec{}.test_fraction));
    const double conv_tol = 3.0 * std::sqrt(0.25 / n_test);
    const Protocol all[] = {Protocol::XYY, Protocol::WYY, Protocol::WhatYY, Protocol::WYYhat,
                            Protocol::WhatYYhat};
    const auto cls = run_audit(t, roles, all, LossKind::zero_one, seeds);
    const auto sq = run_audit(t, with_prediction(roles, "bayes_score"), all, LossKind::squared, seeds);
    auto converge = [&](const std::string& name, double got, double want) {
        log.at_most(name, std::abs(got - want), conv_tol,
                    fmt::format("empirical {:.6f} vs analytic {:.6f}", got, want));
    };
    converge("convergence: WYY zero_one", find(cls, Protocol::WYY).mean, a.baseline_losses.zero_one);
    converge("convergence: XYY(bayes_class) zero_one", find(cls, Protocol::XYY).mean,
             a.bayes_losses.zero_one);
    converge("convergence: WYY squared", find(sq, Protocol::WYY).mean, a.baseline_losses.squared);
    converge("convergence: XYY(bayes_score) squared", find(sq, Protocol::XYY).mean,
             a.bayes_losses.squared);

    // One-sided properties of the backward prediction baseline.
    {
        const auto back = run_audit(t, with_prediction(roles, "backward_class"), all,
                                    LossKind::zero_one, seeds);
        const auto& wyy = find(back, Protocol::WYY);
        const auto& xyy = find(back, Protocol::XYY);
        const double se = combined_standard_error(xyy, wyy);
        log.at_most("g_star_optimal: XYY(g*) <= WYY + 3SE", xyy.mean - wyy.mean, 3.0 * se);

        std::vector<double> flipped(a.g_star_zero_one);
        for (auto& v : flipped) v = 1.0 - v;
        const auto tf = t.with_column(group_map_column("flipped_backward", t.values("w"), flipped));
        const Protocol xyy_only[] = {Protocol::XYY};
        const auto fx = run_audit(tf, with_prediction(roles, "flipped_backward"), xyy_only,
                                  LossKind::zero_one, seeds);
        log.at_most("group_map_floor: XYY(flipped g*) >= WYY - 3SE", wyy.mean - fx[0].mean,
                    3.0 * combined_standard_error(fx[0], wyy));

        // Equivalences for a confident classifier.
        log.at_most("equivalence: |WhatYY - WYY| <= 3SE (backward_class)",
                    std::abs(find(back, Protocol::WhatYY).mean - wyy.mean),
                    3.0 * combined_standard_error(find(back, Protocol::WhatYY), wyy));
        const auto& a1 = find(back, Protocol::WYYhat);
        const auto& a2 = find(back, Protocol::WhatYYhat);
        log.at_most("equivalence: |WYYhat - WhatYYhat| <= 3SE (backward_class)",
                    std::abs(a1.mean - a2.mean), 3.0 * combined_standard_error(a1, a2));
    }
    {
        const Protocol rounding[] = {Protocol::WhatYYhat};
        const auto fwd = run_audit(t, with_prediction(roles, "forward_class"), rounding,
                                   LossKind::zero_one, seeds);
        log.at_most("forward_rounding: WhatYYhat(forward_class) >= constant - 3SE",
                    fwd[0].constant_reference - fwd[0].mean, 3.0 * fwd[0].standard_error());
        const auto ctx = ContextColumn::from_table(t, roles.context_cols);
        log.add("forward_rounding: g_h(forward_class) constant across groups",
                rounded_constant_up_to_noise(ctx, t.values("forward_class")), 0.0, 0.0);
    }

    // Backward rounding recovers g* for confident / weakly calibrated h.
    const auto ctx = ContextColumn::from_table(t, roles.context_cols);
    const auto y = t.values("y");
    {
        const auto h = t.values("backward_class");
        const bool confident = check_confidence(ctx, y, h).confident_in_every_group;
        const bool equal = same_table(fit_group_predictor(LossKind::zero_one, ctx, h),
                                      fit_group_predictor(LossKind::zero_one, ctx, y));
        log.add("backward_rounding: g_h == g* for confident backward_class", confident && equal, 0.0, 0.0,
                confident ? "" : "precondition failed: not confident");

        const auto score = t.values("bayes_score");
        const auto gh = fit_group_predictor(LossKind::squared, ctx, score);
        const auto gs = fit_group_predictor(LossKind::squared, ctx, y);
        double worst = 0.0;
        for (const auto& [key, e] : gh.table) worst = std::max(worst, std::abs(e.value - gs.predict(key)));
        log.at_most("backward_rounding: max |g_h - g*| for bayes_score", worst, 0.01);
    }

    // Bernoulli variance identity and bound chain.
    {
        double worst = 0.0;
        for (const char* col : {"bayes_class", "backward_class", "forward_class"}) {
            worst = std::max(worst,
                             prop3_classification_bounds(ctx, y, t.values(col)).identity_residual);
        }
        log.at_most("variance_identity: Var(h|W) = l_W (1 - l_W)", worst, 1e-12);
        const auto chain = prop3_classification_bounds(ctx, y, t.values("backward_class"));
        log.add("variance_identity: Cov <= Var(h|W) <= Var(Y|W) for confident backward_class",
                chain.confident && chain.chain_holds,
                std::min(chain.cov_le_var_h_margin, chain.var_h_le_var_y_margin), 0.0);
    }

    // Per-dataset statistics for the claims judged against seed error bars.
    std::vector<double> lhs_mid, mid_rhs, gap_vs_analytic, gap_vs_cov, pyth;
    double decomposition = 0.0, parity = 0.0;
    for (std::size_t s = 0; s < data.size(); ++s) {
        const auto& d = data[s];
        const auto c = ContextColumn::from_table(d, roles.context_cols);
        const auto ys = d.values("y");
        const auto score = d.values("bayes_score");
        const auto eq = prop3_regression_equalities(c, ys, score);
        lhs_mid.push_back(eq.lhs - eq.mid);
        mid_rhs.push_back(eq.mid - eq.rhs);
        decomposition = std::max(decomposition, eq.decomposition_residual);
        const std::vector<double> half(ys.size(), 0.5);
        decomposition = std::max(
            decomposition, prop3_regression_equalities(c, ys, half).decomposition_residual);

        const auto cls_col = d.values("bayes_class");
        const auto rs = resampled_baseline(c, ys, cls_col, mix_seed(seeds[s], 0x2E5A));
        const double cov = conditional_covariance(compute_group_moments(c, ys, cls_col));
        gap_vs_analytic.push_back(rs.gap - a.resampled_gap);
        gap_vs_cov.push_back(rs.gap - 2.0 * cov);

        pyth.push_back(pythagorean_decomposition(c, ys, score).residual);
        const auto f = residualize(c, score, 1.0);
        parity = std::max(parity, first_order_parity_check(c, f.values).max_group_mean_abs);
    }
    auto within_se = [&](const std::string& name, const std::vector<double>& xs) {
        const auto m = mean_se(xs);
        log.at_most(name, std::abs(m.mean), 3.0 * m.se);
    };
    log.at_most("variance_identity: two-term loss decomposition", decomposition, 1e-10);
    within_se("variance_identity: lhs == mid within 3SE (bayes_score)", lhs_mid);
    within_se("variance_identity: mid == rhs within 3SE (bayes_score)", mid_rhs);
    within_se("resampling: gap == analytic within 3SE (bayes_class)", gap_vs_analytic);
    within_se("resampling: gap == 2 E_W[Cov] within 3SE (bayes_class)", gap_vs_cov);
    log.at_most("parity: residualized group means at alpha=1", parity, 1e-12);
    within_se("parity: Pythagorean residual within 3SE (bayes_score)", pyth);

    {
        const auto score_cal = check_weak_calibration(
            compute_group_moments(ctx, y, t.values("bayes_score")), kDefaultCalibrationTolerance);
        log.add("calibration: bayes_score weakly calibrated", score_cal.calibrated,
                std::max(score_cal.first_moment_residual, score_cal.second_moment_residual),
                kDefaultCalibrationTolerance);
        const auto fwd_cal = check_weak_calibration(
            compute_group_moments(ctx, y, t.values("forward_score")), kDefaultCalibrationTolerance);
        log.add("calibration: forward_score rejected", !fwd_cal.calibrated,
                std::max(fwd_cal.first_moment_residual, fwd_cal.second_moment_residual),
                kDefaultCalibrationTolerance);
    }

    if (opt.sweep_configs > 0) sweep_basic_properties(opt, log);
    return log.take();
}

}  // namespace backaudit
