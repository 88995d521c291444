#include "backaudit/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "backaudit/error.hpp"
#include "backaudit/kernels.hpp"
#include "backaudit/rng.hpp"

namespace backaudit {

using nlohmann::json;

void OracleConfig::validate() const {
    if (group_probs.empty()) throw ConfigError("oracle: at least one group is required");
    if (forward_levels < 1) throw ConfigError("oracle: forward_levels must be >= 1");
    if (noise_cols < 0) throw ConfigError("oracle: noise_cols must be >= 0");
    double total = 0.0;
    for (double p : group_probs) {
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(fmt::format("oracle: group probability {} outside [0,1]", p));
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ConfigError(fmt::format("oracle: group probabilities sum to {}, not 1", total));
    }
    if (outcome_probs.size() != group_probs.size()) {
        throw ConfigError(fmt::format("oracle: outcome_probs has {} rows for {} groups",
                                      outcome_probs.size(), group_probs.size()));
    }
    for (const auto& row : outcome_probs) {
        if (row.size() != static_cast<std::size_t>(forward_levels)) {
            throw ConfigError(fmt::format("oracle: outcome_probs row has {} entries, expected {}",
                                          row.size(), forward_levels));
        }
        for (double q : row) {
            if (!(q >= 0.0 && q <= 1.0)) throw ConfigError(fmt::format("oracle: outcome probability {} outside [0,1]", q));
        }
    }
}

OracleConfig reference_config() {
    OracleConfig c;
    c.group_probs = {0.5, 0.5};
    c.forward_levels = 2;
    c.outcome_probs = {{0.2, 0.6}, {0.4, 0.8}};
    c.noise_cols = 2;
    c.encode_context = true;
    return c;
}

OracleConfig random_config(std::mt19937_64& rng, int max_groups, int max_levels) {
    if (max_groups < 2 || max_levels < 1) throw ConfigError("random_config: bad limits");
    OracleConfig c;
    const int k = 2 + static_cast<int>(uniform01(rng) * (max_groups - 1));
    c.forward_levels = 1 + static_cast<int>(uniform01(rng) * max_levels);
    std::vector<double> weights(k);
    for (auto& w : weights) w = -std::log(1.0 - uniform01(rng));
    const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (auto w : weights) c.group_probs.push_back(0.2 / k + 0.8 * w / sum);
    c.outcome_probs.assign(k, std::vector<double>(c.forward_levels));
    for (auto& row : c.outcome_probs) {
        for (auto& q : row) q = uniform01(rng);
    }
    c.noise_cols = 1;
    c.encode_context = true;
    return c;
}

OracleConfig parse_oracle_config(const std::string& json_text) {
    OracleConfig c;
    try {
        const json j = json::parse(json_text);
        c.group_probs = j.at("group_probs").get<std::vector<double>>();
        c.forward_levels = j.at("forward_levels").get<int>();
        c.outcome_probs = j.at("outcome_probs").get<std::vector<std::vector<double>>>();
        c.noise_cols = j.value("noise_cols", 0);
        c.encode_context = j.value("encode_context", true);
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("oracle config: {}", e.what()));
    }
    c.validate();
    return c;
}

OracleConfig load_oracle_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open oracle config '{}'", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_oracle_config(ss.str());
}

std::string oracle_config_json(const OracleConfig& c) {
    json j;
    j["group_probs"] = c.group_probs;
    j["forward_levels"] = c.forward_levels;
    j["outcome_probs"] = c.outcome_probs;
    j["noise_cols"] = c.noise_cols;
    j["encode_context"] = c.encode_context;
    return j.dump(2);
}

namespace {

double bayes_class_of(double q) { return q > 0.5 ? 1.0 : 0.0; }

// E[Y | U=u], marginalised over W.
std::vector<double> forward_scores(const OracleConfig& c) {
    std::vector<double> out(c.forward_levels, 0.0);
    for (std::size_t w = 0; w < c.groups(); ++w) {
        for (int u = 0; u < c.forward_levels; ++u) out[u] += c.group_probs[w] * c.outcome_probs[w][u];
    }
    return out;
}

}  // namespace

OracleAnalytics analyze(const OracleConfig& c) {
    c.validate();
    const std::size_t k = c.groups();
    const double pu = 1.0 / c.forward_levels;
    OracleAnalytics a;
    double overall_rate = 0.0;
    double y_hits_gstar = 0.0, h_hits_gstar = 0.0;
    for (std::size_t w = 0; w < k; ++w) {
        const double pw = c.group_probs[w];
        double rate = 0.0, mean_score = 0.0, mean_class = 0.0;
        double y_score = 0.0, y_class = 0.0;
        double bayes01 = 0.0, bayes_sq = 0.0;
        for (int u = 0; u < c.forward_levels; ++u) {
            const double q = c.outcome_probs[w][u];
            const double cls = bayes_class_of(q);
            rate += pu * q;
            mean_score += pu * q;
            mean_class += pu * cls;
            y_score += pu * q * q;    // E[Y h] with h = q and E[Y|w,u] = q
            y_class += pu * q * cls;
            bayes01 += pu * (cls == 1.0 ? 1.0 - q : q);
            bayes_sq += pu * q * (1.0 - q);
        }
        const double gstar = rate > 0.5 ? 1.0 : 0.0;
        a.outcome_rate.push_back(rate);
        a.g_star_zero_one.push_back(gstar);
        a.g_star_squared.push_back(rate);
        a.baseline_losses.zero_one += pw * std::min(rate, 1.0 - rate);
        a.baseline_losses.squared += pw * rate * (1.0 - rate);
        a.bayes_losses.zero_one += pw * bayes01;
        a.bayes_losses.squared += pw * bayes_sq;
        a.expected_conditional_covariance += pw * (y_score - rate * mean_score);
        a.resampled_gap += 2.0 * pw * (y_class - rate * mean_class);
        y_hits_gstar += pw * (gstar == 1.0 ? rate : 1.0 - rate);
        h_hits_gstar += pw * (gstar == 1.0 ? mean_class : 1.0 - mean_class);
        overall_rate += pw * rate;
    }
    a.bayes_class_confidence_margin = h_hits_gstar - y_hits_gstar;
    a.constant_losses.zero_one = std::min(overall_rate, 1.0 - overall_rate);
    a.constant_losses.squared = overall_rate * (1.0 - overall_rate);
    for (std::size_t w = 0; w < k; ++w) {
        a.outcome_rate_spread += c.group_probs[w] * std::abs(a.outcome_rate[w] - overall_rate);
    }
    return a;
}

std::string oracle_analytics_json(const OracleAnalytics& a) {
    json j;
    j["outcome_rate"] = a.outcome_rate;
    j["g_star"] = {{"zero_one", a.g_star_zero_one}, {"squared", a.g_star_squared}};
    j["baseline_losses"] = {{"zero_one", a.baseline_losses.zero_one},
                            {"squared", a.baseline_losses.squared}};
    j["bayes_losses"] = {{"zero_one", a.bayes_losses.zero_one},
                         {"squared", a.bayes_losses.squared}};
    j["constant_losses"] = {{"zero_one", a.constant_losses.zero_one},
                            {"squared", a.constant_losses.squared}};
    j["expected_conditional_covariance"] = a.expected_conditional_covariance;
    j["resampled_gap"] = a.resampled_gap;
    j["bayes_class_confidence_margin"] = a.bayes_class_confidence_margin;
    j["outcome_rate_spread"] = a.outcome_rate_spread;
    return j.dump(2);
}

std::vector<std::string> oracle_column_names(const OracleConfig& c) {
    std::vector<std::string> names{"w"};
    if (c.encode_context) names.push_back("x_w");
    names.push_back("u");
    for (int i = 0; i < c.noise_cols; ++i) names.push_back(fmt::format("noise_{}", i));
    for (const char* n : {"y", "bayes_score", "bayes_class", "backward_class", "backward_score",
                          "forward_class", "forward_score"}) {
        names.push_back(n);
    }
    return names;
}

AuditTable generate(const OracleConfig& c, std::size_t n, std::uint64_t seed) {
    c.validate();
    if (n == 0) throw DataError("generate: row count must be >= 1");
    const auto analytics = analyze(c);
    const auto fwd = forward_scores(c);
    std::vector<double> cumulative(c.groups());
    std::partial_sum(c.group_probs.begin(), c.group_probs.end(), cumulative.begin());

    std::vector<double> w(n), u(n), y(n), score(n), cls(n), back_cls(n), back_score(n),
        fwd_cls(n), fwd_score(n);
    std::vector<std::vector<double>> noise(c.noise_cols, std::vector<double>(n));

    const std::size_t chunks = (n + kernels::kChunkRows - 1) / kernels::kChunkRows;
#pragma omp parallel for schedule(static)
    for (std::size_t ch = 0; ch < chunks; ++ch) {
        std::mt19937_64 rng(mix_seed(seed, ch));
        const std::size_t lo = ch * kernels::kChunkRows;
        const std::size_t hi = std::min(n, lo + kernels::kChunkRows);
        for (std::size_t i = lo; i < hi; ++i) {
            const double rw = uniform01(rng);
            auto wi = static_cast<std::size_t>(
                std::upper_bound(cumulative.begin(), cumulative.end(), rw) - cumulative.begin());
            wi = std::min(wi, c.groups() - 1);
            const int ui = std::min(static_cast<int>(uniform01(rng) * c.forward_levels),
                                    c.forward_levels - 1);
            const double q = c.outcome_probs[wi][ui];
            w[i] = static_cast<double>(wi);
            u[i] = ui;
            y[i] = uniform01(rng) < q ? 1.0 : 0.0;
            for (int j = 0; j < c.noise_cols; ++j) noise[j][i] = uniform01(rng);
            score[i] = q;
            cls[i] = bayes_class_of(q);
            back_cls[i] = analytics.g_star_zero_one[wi];
            back_score[i] = analytics.g_star_squared[wi];
            fwd_cls[i] = ui % 2;
            fwd_score[i] = fwd[ui];
        }
    }

    std::vector<Column> cols;
    cols.push_back(Column::discrete("w", w));
    if (c.encode_context) cols.push_back(Column::discrete("x_w", w));
    cols.push_back(Column::discrete("u", std::move(u)));
    for (int j = 0; j < c.noise_cols; ++j) {
        cols.push_back(Column::real(fmt::format("noise_{}", j), std::move(noise[j])));
    }
    cols.push_back(Column::discrete("y", std::move(y)));
    cols.push_back(Column::real("bayes_score", std::move(score)));
    cols.push_back(Column::discrete("bayes_class", std::move(cls)));
    cols.push_back(Column::discrete("backward_class", std::move(back_cls)));
    cols.push_back(Column::real("backward_score", std::move(back_score)));
    cols.push_back(Column::discrete("forward_class", std::move(fwd_cls)));
    cols.push_back(Column::real("forward_score", std::move(fwd_score)));
    return AuditTable(std::move(cols));
}

RoleMap oracle_roles(const OracleConfig& c) {
    RoleMap r;
    r.context_cols = {"w"};
    if (c.encode_context) r.feature_cols.push_back("x_w");
    r.feature_cols.push_back("u");
    for (int j = 0; j < c.noise_cols; ++j) r.feature_cols.push_back(fmt::format("noise_{}", j));
    r.outcome_col = "y";
    r.prediction_col = "bayes_class";
    r.score_col = "bayes_score";
    return r;
}

std::string role_config_json(const RoleMap& roles) {
    json j;
    j["context"] = roles.context_cols;
    j["features"] = roles.feature_cols;
    if (roles.outcome_col) j["outcome"] = *roles.outcome_col;
    if (roles.prediction_col) j["prediction"] = *roles.prediction_col;
    if (roles.score_col) j["score"] = *roles.score_col;
    return j.dump(2);
}

}  // namespace backaudit
