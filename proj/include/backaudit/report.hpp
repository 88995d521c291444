#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "backaudit/backward.hpp"
#include "backaudit/diagnostics.hpp"
#include "backaudit/losses.hpp"
#include "backaudit/parity.hpp"
#include "backaudit/protocols.hpp"
#include "backaudit/table.hpp"

namespace backaudit {

struct AuditOptions {
    LossKind kind = LossKind::zero_one;
    std::vector<Protocol> protocols;
    std::vector<std::uint64_t> seeds;
    SplitSpec split;
    bool roc = false;
    double alpha = 1.0;
    double calibration_tolerance = kDefaultCalibrationTolerance;
};

struct RocSeries {
    std::uint64_t seed = 0;
    double auc = 0.0;
    std::vector<RocPoint> points;
};

struct ParitySection {
    double alpha = 1.0;
    std::string column;
    ParityCheck check;
    double group_mean_dispersion = 0.0;
    std::optional<PythagoreanDecomposition> pythagorean;
    std::vector<double> residual_values;
};

struct AuditReport {
    std::string input_digest;
    std::size_t n_rows = 0;
    RoleMap roles;
    AuditOptions options;
    std::vector<ProtocolResult> protocol_results;
    DiagnosticReport diagnostics;
    std::optional<ParitySection> parity;
    std::vector<RocSeries> roc;
    std::vector<std::string> group_labels;
    std::optional<GroupPredictor> outcome_table;     // g*
    std::optional<GroupPredictor> prediction_table;  // g_h
};

/// Runs the protocols, the diagnostics and the parity section.
AuditReport build_report(const AuditTable& table, const RoleMap& roles,
                         const AuditOptions& options, std::string input_digest);

/// Key-ordered JSON with every number rounded to 12 significant digits, so
/// identical inputs give byte-identical output.
std::string report_json(const AuditReport& report);

/// protocol, seed, loss, constant_reference
std::string per_seed_tsv(const AuditReport& report);
/// seed, false_positive_rate, true_positive_rate
std::string roc_tsv(const AuditReport& report);

/// Hex SHA-256 of a file's bytes.
std::string file_digest(const std::filesystem::path& path);

double round_significant(double value, int digits = 12);

}  // namespace backaudit
