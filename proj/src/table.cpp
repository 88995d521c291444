#include "backaudit/table.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "backaudit/error.hpp"

namespace backaudit {

namespace {

std::string format_number(double v) {
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        return fmt::format("{}", static_cast<long long>(v));
    }
    return fmt::format("{}", v);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

bool is_missing(std::string_view token) {
    token = trim(token);
    return token.empty() || token == "NA" || token == "N/A" || token == "nan" ||
           token == "NaN" || token == "null";
}

std::optional<double> parse_number(std::string_view token) {
    token = trim(token);
    if (token.empty()) return std::nullopt;
    if (token.front() == '+') token.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

struct CsvRecord {
    std::vector<std::string> fields;
    std::size_t line = 0;
};

// RFC-4180: quoted fields may contain separators, doubled quotes and newlines.
std::vector<CsvRecord> parse_csv(const std::string& text) {
    std::vector<CsvRecord> records;
    CsvRecord current;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1;
    current.line = line;

    auto end_field = [&] {
        current.fields.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        bool blank = current.fields.size() == 1 && current.fields[0].empty();
        if (!blank) records.push_back(std::move(current));
        current = CsvRecord{};
        current.line = line;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (field_started && !field.empty()) {
                    throw DataError(fmt::format("csv line {}: stray quote inside field", line));
                }
                in_quotes = true;
                field_started = true;
                break;
            case ',':
                end_field();
                break;
            case '\r':
                break;
            case '\n':
                ++line;
                end_record();
                break;
            default:
                field.push_back(c);
                field_started = true;
        }
    }
    if (in_quotes) throw DataError("csv: unterminated quoted field");
    if (field_started || !current.fields.empty()) end_record();
    return records;
}

Column dictionary_encode(std::string name, const std::vector<std::string>& tokens) {
    std::set<std::string> distinct(tokens.begin(), tokens.end());
    std::vector<std::string> dictionary(distinct.begin(), distinct.end());
    std::vector<std::uint32_t> codes(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        auto it = std::lower_bound(dictionary.begin(), dictionary.end(), tokens[i]);
        codes[i] = static_cast<std::uint32_t>(it - dictionary.begin());
    }
    return Column::categorical(std::move(name), std::move(codes), std::move(dictionary));
}

bool integer_valued_with_few_levels(const std::vector<double>& values, int threshold) {
    std::set<double> distinct;
    for (double v : values) {
        if (v != std::floor(v)) return false;
        distinct.insert(v);
        if (static_cast<int>(distinct.size()) > threshold) return false;
    }
    return true;
}

}  // namespace

Column Column::real(std::string name, std::vector<double> values) {
    Column c;
    c.name = std::move(name);
    c.values = std::move(values);
    return c;
}

Column Column::categorical(std::string name, std::vector<std::uint32_t> codes,
                           std::vector<std::string> dictionary) {
    for (auto code : codes) {
        if (code >= dictionary.size()) {
            throw DataError(fmt::format("column '{}': code {} outside dictionary of size {}",
                                        name, code, dictionary.size()));
        }
    }
    Column c;
    c.name = std::move(name);
    c.codes = std::move(codes);
    c.dictionary = std::move(dictionary);
    return c;
}

Column Column::discrete(std::string name, std::vector<double> values) {
    std::vector<double> levels(values);
    for (double v : levels) {
        if (!std::isfinite(v)) {
            throw DataError(fmt::format("column '{}': non-finite value", name));
        }
    }
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    Column c;
    c.name = std::move(name);
    c.codes.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        auto it = std::lower_bound(levels.begin(), levels.end(), values[i]);
        c.codes[i] = static_cast<std::uint32_t>(it - levels.begin());
    }
    c.dictionary.reserve(levels.size());
    for (double v : levels) c.dictionary.push_back(format_number(v));
    c.values = std::move(values);
    return c;
}

std::vector<std::string> Column::decode() const {
    if (!is_categorical()) throw DataError(fmt::format("column '{}' is not categorical", name));
    std::vector<std::string> out;
    out.reserve(codes.size());
    for (auto code : codes) out.push_back(dictionary[code]);
    return out;
}

AuditTable::AuditTable(std::vector<Column> columns) : columns_(std::move(columns)) {
    if (columns_.empty()) throw DataError("table has no columns");
    n_rows_ = columns_.front().size();
    if (n_rows_ == 0) throw DataError("table has no rows");
    std::set<std::string> names;
    for (const auto& c : columns_) {
        if (c.size() != n_rows_) {
            throw DataError(fmt::format("column '{}' has {} rows, expected {}", c.name,
                                        c.size(), n_rows_));
        }
        if (c.is_numeric() && c.is_categorical() && c.values.size() != c.codes.size()) {
            throw DataError(fmt::format("column '{}': numeric and categorical views disagree",
                                        c.name));
        }
        if (!names.insert(c.name).second) {
            throw DataError(fmt::format("duplicate column '{}'", c.name));
        }
    }
}

bool AuditTable::has_column(const std::string& name) const {
    return std::any_of(columns_.begin(), columns_.end(),
                       [&](const Column& c) { return c.name == name; });
}

const Column& AuditTable::column(const std::string& name) const {
    for (const auto& c : columns_) {
        if (c.name == name) return c;
    }
    throw ConfigError(fmt::format("missing column '{}'", name));
}

std::span<const double> AuditTable::values(const std::string& name) const {
    const Column& c = column(name);
    if (!c.is_numeric()) throw DataError(fmt::format("column '{}' is not numeric", name));
    return c.values;
}

AuditTable AuditTable::with_column(Column col) const {
    std::vector<Column> cols = columns_;
    auto it = std::find_if(cols.begin(), cols.end(),
                           [&](const Column& c) { return c.name == col.name; });
    if (it != cols.end()) {
        *it = std::move(col);
    } else {
        cols.push_back(std::move(col));
    }
    return AuditTable(std::move(cols));
}

AuditTable AuditTable::take_rows(std::span<const std::size_t> rows) const {
    std::vector<Column> cols;
    cols.reserve(columns_.size());
    for (const auto& src : columns_) {
        Column c;
        c.name = src.name;
        c.dictionary = src.dictionary;
        if (src.is_numeric()) {
            c.values.resize(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i) c.values[i] = src.values.at(rows[i]);
        }
        if (src.is_categorical()) {
            c.codes.resize(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i) c.codes[i] = src.codes.at(rows[i]);
        }
        cols.push_back(std::move(c));
    }
    return AuditTable(std::move(cols));
}

std::vector<std::string> RoleMap::all_columns() const {
    std::vector<std::string> out;
    auto add = [&](const std::string& name) {
        if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
    };
    for (const auto& c : context_cols) add(c);
    for (const auto& c : feature_cols) add(c);
    if (outcome_col) add(*outcome_col);
    if (prediction_col) add(*prediction_col);
    if (score_col) add(*score_col);
    return out;
}

void RoleMap::validate() const {
    if (context_cols.empty()) throw ConfigError("roles: at least one context column is required");
    if (!outcome_col && !prediction_col) {
        throw ConfigError("roles: an outcome or a prediction column is required");
    }
}

int BinSpec::bins_for(const std::string& column) const {
    auto it = per_column.find(column);
    return it != per_column.end() ? it->second : default_bins;
}

RoleConfig parse_role_config(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(fmt::format("roles: invalid JSON ({})", e.what()));
    }
    if (!j.is_object()) throw ConfigError("roles: top level must be an object");

    static const std::set<std::string> known = {"features", "context", "outcome",
                                                "prediction", "score", "bins"};
    RoleConfig cfg;
    try {
        for (const auto& [key, value] : j.items()) {
            if (!known.contains(key)) throw ConfigError(fmt::format("roles: unknown key '{}'", key));
        }
        if (j.contains("features")) cfg.roles.feature_cols = j["features"].get<std::vector<std::string>>();
        if (j.contains("context")) {
            if (j["context"].is_string()) {
                cfg.roles.context_cols = {j["context"].get<std::string>()};
            } else {
                cfg.roles.context_cols = j["context"].get<std::vector<std::string>>();
            }
        }
        auto optional_name = [&](const char* key) -> std::optional<std::string> {
            if (!j.contains(key) || j[key].is_null()) return std::nullopt;
            return j[key].get<std::string>();
        };
        cfg.roles.outcome_col = optional_name("outcome");
        cfg.roles.prediction_col = optional_name("prediction");
        cfg.roles.score_col = optional_name("score");
        if (j.contains("bins")) {
            for (const auto& [col, count] : j["bins"].items()) {
                int b = count.get<int>();
                if (b < 1) throw ConfigError(fmt::format("roles: bin count for '{}' must be >= 1", col));
                cfg.bins.per_column[col] = b;
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(fmt::format("roles: wrong value type ({})", e.what()));
    }
    cfg.roles.validate();
    return cfg;
}

RoleConfig load_role_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open role file '{}'", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_role_config(ss.str());
}

Column quantile_bin(std::string name, std::vector<double> values, int bins) {
    if (bins < 1) throw ConfigError(fmt::format("column '{}': bin count must be >= 1", name));
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    // Tied values share the rank of their first occurrence, so a value never
    // lands in a lower bin than a smaller value.
    std::vector<std::uint32_t> raw(n);
    std::size_t first = 0;
    for (std::size_t r = 0; r < n; ++r) {
        if (r > 0 && values[order[r]] != values[order[r - 1]]) first = r;
        std::size_t b = first * static_cast<std::size_t>(bins) / n;
        raw[order[r]] = static_cast<std::uint32_t>(std::min<std::size_t>(b, bins - 1));
    }

    std::vector<std::uint32_t> used(raw.begin(), raw.end());
    std::sort(used.begin(), used.end());
    used.erase(std::unique(used.begin(), used.end()), used.end());
    std::vector<double> lo(used.size(), INFINITY), hi(used.size(), -INFINITY);
    std::vector<std::uint32_t> codes(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto code = static_cast<std::uint32_t>(
            std::lower_bound(used.begin(), used.end(), raw[i]) - used.begin());
        codes[i] = code;
        lo[code] = std::min(lo[code], values[i]);
        hi[code] = std::max(hi[code], values[i]);
    }
    std::vector<std::string> dictionary;
    for (std::size_t b = 0; b < used.size(); ++b) {
        dictionary.push_back(fmt::format("[{:.6g}, {:.6g}]", lo[b], hi[b]));
    }
    Column c = Column::categorical(std::move(name), std::move(codes), std::move(dictionary));
    c.values = std::move(values);
    return c;
}

AuditTable ingest_csv_text(const std::string& text, const RoleMap& roles, const BinSpec& bins) {
    roles.validate();
    auto records = parse_csv(text);
    if (records.empty()) throw DataError("csv: empty file");
    const auto& header = records.front().fields;
    if (records.size() < 2) throw DataError("csv: header present but no data rows");

    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < header.size(); ++i) {
        std::string name(trim(header[i]));
        if (!position.emplace(name, i).second) {
            throw DataError(fmt::format("csv: duplicate header column '{}'", name));
        }
    }
    const auto role_cols = roles.all_columns();
    for (const auto& name : role_cols) {
        if (!position.contains(name)) {
            throw ConfigError(fmt::format("role column '{}' not found in csv header", name));
        }
    }

    std::set<std::string> declared_real;
    for (const auto& opt : {roles.outcome_col, roles.prediction_col, roles.score_col}) {
        if (opt) declared_real.insert(*opt);
    }
    std::set<std::string> context(roles.context_cols.begin(), roles.context_cols.end());

    std::vector<const CsvRecord*> kept;
    std::size_t dropped = 0;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() != header.size()) {
            throw DataError(fmt::format("csv line {}: expected {} fields, found {}", rec.line,
                                        header.size(), rec.fields.size()));
        }
        bool missing = std::any_of(role_cols.begin(), role_cols.end(), [&](const std::string& c) {
            return is_missing(rec.fields[position[c]]);
        });
        if (missing) {
            ++dropped;
        } else {
            kept.push_back(&rec);
        }
    }
    if (dropped > 0) spdlog::warn("dropped {} row(s) with missing role values", dropped);
    if (kept.empty()) throw DataError("csv: no complete rows after dropping missing values");

    std::vector<Column> columns;
    for (std::size_t ci = 0; ci < header.size(); ++ci) {
        std::string name(trim(header[ci]));
        std::vector<std::string> tokens;
        tokens.reserve(kept.size());
        for (const auto* rec : kept) tokens.emplace_back(trim(rec->fields[ci]));

        std::vector<double> numbers(tokens.size());
        bool numeric = true;
        std::size_t bad_row = 0;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (auto v = parse_number(tokens[i])) {
                numbers[i] = *v;
            } else if (!context.contains(name) && !declared_real.contains(name) &&
                       is_missing(tokens[i])) {
                numbers[i] = std::nan("");
            } else {
                numeric = false;
                bad_row = kept[i]->line;
                break;
            }
        }

        if (declared_real.contains(name) && !numeric) {
            throw DataError(fmt::format("csv line {}: non-numeric value in numeric column '{}'",
                                        bad_row, name));
        }
        if (!numeric) {
            columns.push_back(dictionary_encode(std::move(name), tokens));
            continue;
        }
        bool has_nan = std::any_of(numbers.begin(), numbers.end(),
                                   [](double v) { return std::isnan(v); });
        if (!has_nan && integer_valued_with_few_levels(numbers, bins.discrete_threshold)) {
            columns.push_back(Column::discrete(std::move(name), std::move(numbers)));
        } else if (context.contains(name)) {
            int b = bins.bins_for(name);
            columns.push_back(quantile_bin(std::move(name), std::move(numbers), b));
        } else {
            columns.push_back(Column::real(std::move(name), std::move(numbers)));
        }
    }
    return AuditTable(std::move(columns));
}

AuditTable ingest_csv(const std::filesystem::path& path, const RoleMap& roles, const BinSpec& bins) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("cannot open input '{}'", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    return ingest_csv_text(ss.str(), roles, bins);
}

void write_csv(const AuditTable& table, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
    const auto& cols = table.columns();
    for (std::size_t c = 0; c < cols.size(); ++c) {
        out << (c ? "," : "") << cols[c].name;
    }
    out << '\n';
    std::string line;
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        line.clear();
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (c) line.push_back(',');
            const Column& col = cols[c];
            if (col.is_numeric()) {
                line += format_number(col.values[r]);
            } else {
                const std::string& label = col.dictionary[col.codes[r]];
                if (label.find_first_of(",\"\n") != std::string::npos) {
                    std::string quoted = "\"";
                    for (char ch : label) {
                        if (ch == '"') quoted.push_back('"');
                        quoted.push_back(ch);
                    }
                    line += quoted + "\"";
                } else {
                    line += label;
                }
            }
        }
        line.push_back('\n');
        out << line;
    }
    if (!out) throw DataError(fmt::format("write to '{}' failed", path.string()));
}

void SplitSpec::validate() const {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw ConfigError(fmt::format("split: test fraction {} must lie in (0,1)", test_fraction));
    }
    if (!(inner_fraction > 0.0 && inner_fraction < 1.0)) {
        throw ConfigError(fmt::format("split: inner fraction {} must lie in (0,1)", inner_fraction));
    }
}

std::size_t held_out_count(std::size_t n, double fraction) {
    if (n < 2) throw DataError(fmt::format("cannot split {} row(s); need at least 2", n));
    auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 0.5));
    return std::clamp<std::size_t>(k, 1, n - 1);
}

SplitIndices split_indices(std::size_t n, double fraction, std::uint64_t seed) {
    const std::size_t n_test = held_out_count(n, fraction);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    SplitIndices out;
    out.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    out.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    std::sort(out.test.begin(), out.test.end());
    std::sort(out.train.begin(), out.train.end());
    return out;
}

std::pair<AuditTable, AuditTable> split(const AuditTable& table, const SplitSpec& spec) {
    spec.validate();
    auto idx = split_indices(table.n_rows(), spec.test_fraction, spec.seed);
    return {table.take_rows(idx.train), table.take_rows(idx.test)};
}

}  // namespace backaudit
