#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "backaudit/table.hpp"

namespace backaudit {

/// Finite data-generating process with a known joint distribution:
///   W ~ group_probs                      (context, k values)
///   U ~ uniform over forward_levels      (latent forward signal, independent of W)
///   Y ~ Bernoulli(outcome_probs[W][U])
/// plus `noise_cols` uniform [0,1) feature columns. With encode_context the
/// context is copied into the features as column "x_w".
struct OracleConfig {
    std::vector<double> group_probs;
    int forward_levels = 1;
    std::vector<std::vector<double>> outcome_probs;
    int noise_cols = 0;
    bool encode_context = true;

    std::size_t groups() const { return group_probs.size(); }
    /// Throws ConfigError on any invalid probability or shape.
    void validate() const;
};

/// k=2, m=2, uniform groups, q = [[0.2,0.6],[0.4,0.8]], two noise columns.
OracleConfig reference_config();

/// Random config with 2..max_groups groups (each with mass at least
/// 0.2/k) and 1..max_levels forward levels.
OracleConfig random_config(std::mt19937_64& rng, int max_groups = 4, int max_levels = 4);

OracleConfig parse_oracle_config(const std::string& json_text);
OracleConfig load_oracle_config(const std::filesystem::path& path);
std::string oracle_config_json(const OracleConfig& config);

struct LossPair {
    double zero_one = 0.0;
    double squared = 0.0;
};

/// Exact population quantities, by enumeration of the (W, U, Y) cells.
struct OracleAnalytics {
    std::vector<double> outcome_rate;     // E[Y | W=w]
    std::vector<double> g_star_zero_one;  // per-group majority label, ties to 0
    std::vector<double> g_star_squared;   // E[Y | W=w]
    LossPair baseline_losses;             // WYY
    LossPair bayes_losses;                // XYY with bayes_class / bayes_score
    LossPair constant_losses;
    double expected_conditional_covariance = 0.0;  // E_W[Cov(Y, bayes_score | W)]
    double resampled_gap = 0.0;                    // 2 E_W[Cov(Y, bayes_class | W)]
    double bayes_class_confidence_margin = 0.0;    // Pr[h=g*] - Pr[Y=g*]
    /// Sum_w Pr[w] |E[Y|w] - E[Y]|: first-moment calibration error of any
    /// pure forward score whose mean matches E[Y].
    double outcome_rate_spread = 0.0;
};

OracleAnalytics analyze(const OracleConfig& config);

std::string oracle_analytics_json(const OracleAnalytics& analytics);

/// Columns emitted by generate(), in order.
///   w, [x_w], u, noise_0.., y,
///   bayes_score    q[w][u]
///   bayes_class    q[w][u] > 0.5
///   backward_class g* zero-one, a pure backward predictor
///   backward_score E[Y | W]
///   forward_class  U mod 2, a pure forward predictor
///   forward_score  E[Y | U], a pure forward score
std::vector<std::string> oracle_column_names(const OracleConfig& config);

/// Rows are generated in fixed chunks of kernels::kChunkRows, chunk c from
/// its own stream mix_seed(seed, c), so output is identical for any thread
/// count. Throws DataError when n == 0.
AuditTable generate(const OracleConfig& config, std::size_t n, std::uint64_t seed);

/// Roles for generated data: context w, outcome y, prediction bayes_class,
/// score bayes_score, features u, noise columns and x_w.
RoleMap oracle_roles(const OracleConfig& config);
std::string role_config_json(const RoleMap& roles);

}  // namespace backaudit
