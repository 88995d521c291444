#include "backaudit/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "backaudit/error.hpp"

namespace backaudit {

using nlohmann::json;

double round_significant(double value, int digits) {
    if (!std::isfinite(value) || value == 0.0) return value;
    return std::strtod(fmt::format("{:.{}g}", value, digits).c_str(), nullptr);
}

namespace {

json num(double v) {
    if (!std::isfinite(v)) return nullptr;
    return round_significant(v);
}

json nums(const std::vector<double>& vs) {
    json a = json::array();
    for (double v : vs) a.push_back(num(v));
    return a;
}

json group_table_json(const GroupPredictor& g) {
    json groups = json::array();
    for (const auto& [key, entry] : g.table) {
        groups.push_back({{"group", entry.label},
                          {"codes", key.codes},
                          {"support", entry.support},
                          {"value", num(entry.value)}});
    }
    return {{"loss", std::string(to_string(g.kind))},
            {"fallback", num(g.fallback)},
            {"groups", groups}};
}

json diagnostics_json(const DiagnosticReport& d) {
    json j = json::object();
    if (d.confidence) {
        j["confidence"] = {{"confident", d.confidence->confident},
                           {"margin", num(d.confidence->margin)},
                           {"confident_in_every_group", d.confidence->confident_in_every_group},
                           {"group_margins", nums(d.confidence->group_margins)}};
    }
    if (d.classification) {
        const auto& c = *d.classification;
        j["classification_bounds"] = {{"cov", num(c.cov)},
                                      {"var_h", num(c.var_h)},
                                      {"rounding_loss", num(c.rounding_loss)},
                                      {"variance_identity_residual", num(c.identity_residual)},
                                      {"var_y", num(c.var_y)},
                                      {"cov_le_var_h_margin", num(c.cov_le_var_h_margin)},
                                      {"var_h_le_var_y_margin", num(c.var_h_le_var_y_margin)},
                                      {"chain_holds", c.chain_holds},
                                      {"precondition_confident", c.confident}};
    }
    if (d.resampled) {
        j["resampled_baseline"] = {{"loss_resampled", num(d.resampled->loss_resampled)},
                                   {"gap", num(d.resampled->gap)}};
    }
    if (d.weak_calibration) {
        const auto& w = *d.weak_calibration;
        j["weak_calibration"] = {{"weakly_calibrated", w.calibrated},
                                 {"first_moment_residual", num(w.first_moment_residual)},
                                 {"second_moment_residual", num(w.second_moment_residual)},
                                 {"tolerance", num(w.tolerance)}};
    }
    if (d.expected_conditional_covariance) {
        j["expected_conditional_covariance"] = num(*d.expected_conditional_covariance);
    }
    if (d.regression) {
        const auto& r = *d.regression;
        j["regression_equalities"] = {{"lhs", num(r.lhs)},
                                      {"mid", num(r.mid)},
                                      {"rhs", num(r.rhs)},
                                      {"rounding_gap", num(r.rounding_gap)},
                                      {"decomposition_residual", num(r.decomposition_residual)}};
    }
    if (d.pythagorean_residuals) {
        j["pythagorean_residuals"] = {{"pythagorean", num(d.pythagorean_residuals->first)},
                                      {"two_term", num(d.pythagorean_residuals->second)}};
    }
    if (d.independence) {
        j["independence"] = {{"forward_score", num(d.independence->forward_score)},
                             {"backward_score", num(d.independence->backward_score)}};
    }
    return j;
}

bool all_binary(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0 || x == 1.0; });
}

bool all_unit(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x >= 0.0 && x <= 1.0; });
}

}  // namespace

AuditReport build_report(const AuditTable& table, const RoleMap& roles,
                         const AuditOptions& options, std::string input_digest) {
    roles.validate();
    if (options.seeds.empty()) throw ConfigError("audit: seed list is empty");
    AuditReport report;
    report.input_digest = std::move(input_digest);
    report.n_rows = table.n_rows();
    report.roles = roles;
    report.options = options;
    report.protocol_results =
        run_audit(table, roles, options.protocols, options.kind, options.seeds, options.split);

    const auto contexts = ContextColumn::from_table(table, roles.context_cols);
    report.group_labels = contexts.labels();

    std::span<const double> y, pred, score;
    if (roles.outcome_col) y = table.values(*roles.outcome_col);
    if (roles.prediction_col) pred = table.values(*roles.prediction_col);
    if (roles.score_col) score = table.values(*roles.score_col);

    if (!y.empty() && all_unit(y)) {
        report.outcome_table = fit_group_predictor(
            all_binary(y) ? options.kind : LossKind::squared, contexts, y);
    }
    if (!pred.empty() && all_unit(pred)) {
        report.prediction_table = fit_group_predictor(
            all_binary(pred) ? options.kind : LossKind::squared, contexts, pred);
    }

    auto& d = report.diagnostics;
    if (!y.empty() && !pred.empty() && all_binary(y) && all_binary(pred)) {
        d.confidence = check_confidence(contexts, y, pred);
        d.classification = prop3_classification_bounds(contexts, y, pred);
        d.resampled = resampled_baseline(contexts, y, pred, options.seeds.front());
    }
    // Real-valued predictor for the regression-side checks: the score column
    // when present, otherwise the prediction column.
    std::span<const double> h = !score.empty() ? score : pred;
    const std::string h_name = !score.empty() ? *roles.score_col
                               : roles.prediction_col ? *roles.prediction_col : std::string();
    if (!y.empty() && !h.empty()) {
        d.independence = independence_scores(contexts, y, h);
    }
    if (!y.empty() && !h.empty() && all_unit(y) && all_unit(h)) {
        const auto moments = compute_group_moments(contexts, y, h);
        d.weak_calibration = check_weak_calibration(moments, options.calibration_tolerance);
        d.expected_conditional_covariance = conditional_covariance(moments);
        d.regression = prop3_regression_equalities(contexts, y, h);
        const auto pyth = pythagorean_decomposition(contexts, y, h);
        d.pythagorean_residuals = std::make_pair(pyth.residual, d.regression->decomposition_residual);
    }

    if (!h.empty()) {
        ParitySection p;
        p.alpha = options.alpha;
        p.column = h_name;
        auto f = residualize(contexts, h, options.alpha);
        p.check = first_order_parity_check(contexts, f.values);
        p.group_mean_dispersion = group_mean_dispersion(contexts, f.values);
        if (!y.empty()) p.pythagorean = pythagorean_decomposition(contexts, y, h);
        p.residual_values = std::move(f.values);
        report.parity = std::move(p);
    }

    if (options.roc) {
        if (y.empty() || h.empty()) {
            throw ConfigError("--roc needs an outcome and a score or prediction column");
        }
        for (auto seed : options.seeds) {
            const auto idx = split_indices(table.n_rows(), options.split.test_fraction, seed);
            const auto s = take_values(h, idx.test);
            const auto labels = take_values(y, idx.test);
            RocSeries series{seed, 0.0, roc_curve(s, labels)};
            series.auc = roc_auc(series.points);
            report.roc.push_back(std::move(series));
        }
    }
    return report;
}

std::string report_json(const AuditReport& r) {
    json j;
    json roles = {{"context", r.roles.context_cols}, {"features", r.roles.feature_cols}};
    if (r.roles.outcome_col) roles["outcome"] = *r.roles.outcome_col;
    if (r.roles.prediction_col) roles["prediction"] = *r.roles.prediction_col;
    if (r.roles.score_col) roles["score"] = *r.roles.score_col;

    json protocols = json::array();
    for (auto p : r.options.protocols) protocols.push_back(std::string(to_string(p)));

    j["metadata"] = {{"input_digest", r.input_digest},
                     {"n_rows", r.n_rows},
                     {"loss", std::string(to_string(r.options.kind))},
                     {"protocols", protocols},
                     {"seeds", r.options.seeds},
                     {"test_fraction", num(r.options.split.test_fraction)},
                     {"inner_fraction", num(r.options.split.inner_fraction)},
                     {"alpha", num(r.options.alpha)},
                     {"calibration_tolerance", num(r.options.calibration_tolerance)},
                     {"roles", roles}};

    json results = json::array();
    for (const auto& pr : r.protocol_results) {
        results.push_back({{"protocol", std::string(to_string(pr.protocol))},
                           {"loss", std::string(to_string(pr.kind))},
                           {"per_seed_losses", nums(pr.per_seed_losses)},
                           {"per_seed_constant_references", nums(pr.per_seed_constant_references)},
                           {"mean", num(pr.mean)},
                           {"stddev", num(pr.stddev)},
                           {"standard_error", num(pr.standard_error())},
                           {"constant_reference", num(pr.constant_reference)}});
    }
    j["protocol_results"] = results;
    j["diagnostics"] = diagnostics_json(r.diagnostics);

    if (r.parity) {
        const auto& p = *r.parity;
        json means = json::array();
        for (std::size_t g = 0; g < p.check.group_means.size(); ++g) {
            means.push_back({{"group", r.group_labels.at(g)}, {"mean", num(p.check.group_means[g])}});
        }
        json parity = {{"alpha", num(p.alpha)},
                       {"column", p.column},
                       {"group_means", means},
                       {"max_group_mean_abs", num(p.check.max_group_mean_abs)},
                       {"first_order_parity", p.check.holds},
                       {"group_mean_dispersion", num(p.group_mean_dispersion)}};
        if (p.pythagorean) {
            parity["pythagorean"] = {{"total", num(p.pythagorean->total)},
                                     {"forward_term", num(p.pythagorean->forward_term)},
                                     {"backward_term", num(p.pythagorean->backward_term)},
                                     {"residual", num(p.pythagorean->residual)}};
        }
        j["parity"] = parity;
    }

    json groups = json::object();
    if (r.outcome_table) groups["outcome"] = group_table_json(*r.outcome_table);
    if (r.prediction_table) groups["prediction"] = group_table_json(*r.prediction_table);
    j["group_tables"] = groups;

    if (!r.roc.empty()) {
        json roc = json::array();
        for (const auto& s : r.roc) {
            json pts = json::array();
            for (const auto& p : s.points) {
                pts.push_back({num(p.false_positive_rate), num(p.true_positive_rate)});
            }
            roc.push_back({{"seed", s.seed}, {"auc", num(s.auc)}, {"points", pts}});
        }
        j["roc"] = roc;
    }
    return j.dump(2) + "\n";
}

std::string per_seed_tsv(const AuditReport& r) {
    std::string out = "protocol\tseed\tloss\tconstant_reference\n";
    for (const auto& pr : r.protocol_results) {
        for (std::size_t s = 0; s < pr.per_seed_losses.size(); ++s) {
            out += fmt::format("{}\t{}\t{:.12g}\t{:.12g}\n", to_string(pr.protocol),
                               r.options.seeds[s], pr.per_seed_losses[s],
                               pr.per_seed_constant_references[s]);
        }
    }
    return out;
}

std::string roc_tsv(const AuditReport& r) {
    std::string out = "seed\tfalse_positive_rate\ttrue_positive_rate\n";
    for (const auto& s : r.roc) {
        for (const auto& p : s.points) {
            out += fmt::format("{}\t{:.12g}\t{:.12g}\n", s.seed, p.false_positive_rate,
                               p.true_positive_rate);
        }
    }
    return out;
}

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("cannot open input '{}'", path.string()));
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw DataError("sha256 digest failed");
    }
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
    return "sha256:" + hex;
}

}  // namespace backaudit
