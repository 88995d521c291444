#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace backaudit {

/// One named column. A column may carry a numeric view, a categorical view,
/// or both (integer-valued columns with few distinct values get both).
struct Column {
    std::string name;
    std::vector<double> values;
    std::vector<std::uint32_t> codes;
    std::vector<std::string> dictionary;

    static Column real(std::string name, std::vector<double> values);
    static Column categorical(std::string name, std::vector<std::uint32_t> codes,
                              std::vector<std::string> dictionary);
    /// Numeric column whose distinct values also become categories, ordered
    /// by value. Throws DataError on non-finite input.
    static Column discrete(std::string name, std::vector<double> values);

    bool is_numeric() const { return !values.empty(); }
    bool is_categorical() const { return !codes.empty(); }
    std::size_t size() const { return is_numeric() ? values.size() : codes.size(); }
    std::size_t cardinality() const { return dictionary.size(); }

    /// Labels for every row; requires a categorical view.
    std::vector<std::string> decode() const;
};

/// Immutable columnar table; every column has the same non-zero length.
class AuditTable {
public:
    explicit AuditTable(std::vector<Column> columns);

    std::size_t n_rows() const { return n_rows_; }
    std::size_t n_columns() const { return columns_.size(); }
    const std::vector<Column>& columns() const { return columns_; }

    bool has_column(const std::string& name) const;
    /// Throws ConfigError naming the column when absent.
    const Column& column(const std::string& name) const;
    std::span<const double> values(const std::string& name) const;

    /// Copy with `col` appended, or replacing a column of the same name.
    AuditTable with_column(Column col) const;
    /// Row subset in the given order.
    AuditTable take_rows(std::span<const std::size_t> rows) const;

private:
    std::vector<Column> columns_;
    std::size_t n_rows_ = 0;
};

struct RoleMap {
    std::vector<std::string> feature_cols;
    std::vector<std::string> context_cols;
    std::optional<std::string> outcome_col;
    std::optional<std::string> prediction_col;
    std::optional<std::string> score_col;

    /// All role column names, context first, without duplicates.
    std::vector<std::string> all_columns() const;
    /// Throws ConfigError when no context column or neither outcome nor
    /// prediction is named.
    void validate() const;
};

struct BinSpec {
    std::map<std::string, int> per_column;
    int default_bins = 10;
    /// Integer-valued columns with at most this many distinct values are
    /// taken as discrete instead of binned.
    int discrete_threshold = 64;

    int bins_for(const std::string& column) const;
};

/// Role file: JSON object with keys "features", "context", "outcome",
/// "prediction", "score" and optional "bins" (column -> count).
struct RoleConfig {
    RoleMap roles;
    BinSpec bins;
};

RoleConfig load_role_config(const std::filesystem::path& path);
RoleConfig parse_role_config(const std::string& json_text);

/// Reads an RFC-4180 CSV with a mandatory header row.
///
/// Context columns always come out categorical: strings are
/// dictionary-encoded in sorted order, integer columns with few distinct
/// values become discrete, anything else is quantile-binned. Outcome,
/// prediction and score columns must be numeric. Rows with a missing value
/// in any role column are dropped.
AuditTable ingest_csv(const std::filesystem::path& path, const RoleMap& roles,
                      const BinSpec& bins = {});
AuditTable ingest_csv_text(const std::string& text, const RoleMap& roles,
                           const BinSpec& bins = {});

/// Rank-based quantile binning; codes are dense and non-decreasing in value.
Column quantile_bin(std::string name, std::vector<double> values, int bins);

/// Writes every column, numeric columns with round-trip precision and
/// categorical-only columns by label.
void write_csv(const AuditTable& table, const std::filesystem::path& path);

struct SplitSpec {
    double test_fraction = 0.33;
    double inner_fraction = 0.5;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Number of held-out rows: round-half-up of fraction * n, clamped so each
/// side keeps at least one row.
std::size_t held_out_count(std::size_t n, double fraction);

/// Shuffles row indices with `seed` and cuts off the held-out part. Both
/// sides are returned in ascending row order.
SplitIndices split_indices(std::size_t n, double fraction, std::uint64_t seed);

std::pair<AuditTable, AuditTable> split(const AuditTable& table, const SplitSpec& spec);

}  // namespace backaudit
