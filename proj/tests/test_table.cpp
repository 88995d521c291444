#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include <fmt/format.h>

#include "backaudit/error.hpp"
#include "backaudit/table.hpp"

using namespace backaudit;

namespace {

RoleMap roles_wy() {
    RoleMap r;
    r.context_cols = {"w"};
    r.outcome_col = "y";
    return r;
}

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
    auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path, std::ios::binary) << contents;
    return path;
}

}  // namespace

TEST(IngestCsv, MinimalWellFormedInput) {
    auto t = ingest_csv_text("w,y\n0,1\n1,0\n", roles_wy());
    EXPECT_EQ(t.n_rows(), 2u);
    for (const char* name : {"w", "y"}) {
        const Column& c = t.column(name);
        ASSERT_TRUE(c.is_categorical()) << name;
        EXPECT_EQ(c.dictionary, (std::vector<std::string>{"0", "1"}));
    }
    EXPECT_EQ(t.column("w").codes, (std::vector<std::uint32_t>{0, 1}));
    EXPECT_EQ(t.column("y").values, (std::vector<double>{1.0, 0.0}));
}

TEST(IngestCsv, MissingRoleColumnNamesIt) {
    RoleMap r = roles_wy();
    r.feature_cols = {"z"};
    try {
        ingest_csv_text("w,y\n0,1\n1,0\n", r);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("'z'"), std::string::npos);
    }
}

TEST(IngestCsv, FileBasedIngestAndMissingFile) {
    auto path = temp_file("backaudit_ingest.csv", "w,y\r\n0,1\r\n1,0\r\n");
    EXPECT_EQ(ingest_csv(path, roles_wy()).n_rows(), 2u);
    EXPECT_THROW(ingest_csv("/nonexistent/x.csv", roles_wy()), DataError);
}

TEST(IngestCsv, EmptyFileIsDataError) {
    EXPECT_THROW(ingest_csv_text("", roles_wy()), DataError);
    EXPECT_THROW(ingest_csv_text("w,y\n", roles_wy()), DataError);
}

TEST(IngestCsv, NonNumericOutcomeReportsRow) {
    try {
        ingest_csv_text("w,y\n0,1\n1,yes\n", roles_wy());
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
}

TEST(IngestCsv, RaggedRowIsDataError) {
    EXPECT_THROW(ingest_csv_text("w,y\n0,1\n1\n", roles_wy()), DataError);
}

TEST(IngestCsv, DropsRowsWithMissingRoleValues) {
    auto t = ingest_csv_text("w,y,note\n0,1,a\n,0,b\n1,NA,c\n1,0,\n", roles_wy());
    EXPECT_EQ(t.n_rows(), 2u);
    EXPECT_EQ(t.column("note").decode(), (std::vector<std::string>{"a", ""}));
}

TEST(IngestCsv, QuotedFieldsAndStringContexts) {
    auto t = ingest_csv_text("w,y\n\"b, x\",1\n\"a \"\"q\"\"\",0\n\"b, x\",0\n", roles_wy());
    const Column& w = t.column("w");
    EXPECT_EQ(w.dictionary, (std::vector<std::string>{"a \"q\"", "b, x"}));
    EXPECT_EQ(w.codes, (std::vector<std::uint32_t>{1, 0, 1}));
}

TEST(IngestCsv, QuantileBinsNumericContext) {
    std::mt19937_64 rng(7);
    std::vector<double> ages(1000);
    for (std::size_t i = 0; i < ages.size(); ++i) ages[i] = 18.0 + i * 0.0617 + 1e-6 * (rng() % 97);
    std::shuffle(ages.begin(), ages.end(), rng);
    std::string csv = "age,y\n";
    for (double a : ages) csv += fmt::format("{:.9f},{}\n", a, rng() % 2);

    RoleMap r;
    r.context_cols = {"age"};
    r.outcome_col = "y";
    BinSpec bins;
    bins.per_column["age"] = 10;
    auto t = ingest_csv_text(csv, r, bins);
    const Column& c = t.column("age");
    ASSERT_TRUE(c.is_categorical());
    EXPECT_EQ(c.cardinality(), 10u);
    std::map<std::uint32_t, int> occupancy;
    for (auto code : c.codes) ++occupancy[code];
    ASSERT_EQ(occupancy.size(), 10u);
    for (const auto& [code, count] : occupancy) EXPECT_EQ(count, 100) << "bin " << code;
}

TEST(IngestCsv, IntegerContextWithFewLevelsStaysDiscrete) {
    std::string csv = "w,y\n";
    for (int i = 0; i < 300; ++i) csv += fmt::format("{},{}\n", i % 64, i % 2);
    auto t = ingest_csv_text(csv, roles_wy());
    EXPECT_EQ(t.column("w").cardinality(), 64u);

    csv = "w,y\n";
    for (int i = 0; i < 300; ++i) csv += fmt::format("{},{}\n", i % 65, i % 2);
    t = ingest_csv_text(csv, roles_wy());
    EXPECT_EQ(t.column("w").cardinality(), 10u);
}

TEST(Binning, CodeIsNonDecreasingInValue) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng() % 400;
        const int bins = 1 + static_cast<int>(rng() % 20);
        std::vector<double> v(n);
        // Coarse values force ties.
        for (auto& x : v) x = static_cast<double>(rng() % 50) / 7.0;
        const Column c = quantile_bin("x", v, bins);
        EXPECT_LE(c.cardinality(), static_cast<std::size_t>(bins));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (v[i] < v[j]) ASSERT_LE(c.codes[i], c.codes[j]);
                if (v[i] == v[j]) ASSERT_EQ(c.codes[i], c.codes[j]);
            }
        }
    }
}

TEST(Encoding, DictionaryRoundTripReproducesSource) {
    std::mt19937_64 rng(3);
    const std::string alphabet = "ab ,\"x";
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::string> source;
        std::string csv = "w,y\n";
        for (int i = 0; i < 30; ++i) {
            std::string s = "s";
            for (int k = 0; k < 4; ++k) s += alphabet[rng() % alphabet.size()];
            source.push_back(s);
            std::string quoted;
            for (char ch : s) {
                if (ch == '"') quoted += '"';
                quoted += ch;
            }
            csv += "\"" + quoted + "\"," + std::to_string(rng() % 2) + "\n";
        }
        // Leading/trailing blanks are trimmed on ingest.
        for (auto& s : source) {
            while (!s.empty() && s.back() == ' ') s.pop_back();
        }
        auto t = ingest_csv_text(csv, roles_wy());
        EXPECT_EQ(t.column("w").decode(), source);
    }
}

TEST(RoleConfig, ParsesAndValidates) {
    auto cfg = parse_role_config(
        R"({"context": ["w"], "features": ["x"], "outcome": "y", "prediction": "p",
            "bins": {"age": 5}})");
    EXPECT_EQ(cfg.roles.context_cols, (std::vector<std::string>{"w"}));
    EXPECT_EQ(cfg.roles.prediction_col.value(), "p");
    EXPECT_FALSE(cfg.roles.score_col.has_value());
    EXPECT_EQ(cfg.bins.bins_for("age"), 5);
    EXPECT_EQ(cfg.bins.bins_for("other"), 10);

    EXPECT_THROW(parse_role_config(R"({"outcome": "y"})"), ConfigError);
    EXPECT_THROW(parse_role_config(R"({"context": ["w"]})"), ConfigError);
    EXPECT_THROW(parse_role_config(R"({"context": ["w"], "outcome": 3})"), ConfigError);
    EXPECT_THROW(parse_role_config(R"({"context": ["w"], "outcome": "y", "typo": 1})"), ConfigError);
    EXPECT_THROW(parse_role_config("not json"), ConfigError);
}

TEST(Table, RejectsUnequalColumns) {
    EXPECT_THROW(AuditTable({Column::real("a", {1, 2}), Column::real("b", {1})}), DataError);
    EXPECT_THROW(AuditTable({Column::real("a", {})}), DataError);
}

TEST(Table, WriteCsvThenIngest) {
    AuditTable t({Column::discrete("w", {0, 1, 1}), Column::real("s", {0.125, 0.3, 1.0 / 3.0}),
                  Column::categorical("c", {0, 1, 0}, {"x,y", "plain"})});
    auto path = std::filesystem::temp_directory_path() / "backaudit_roundtrip.csv";
    write_csv(t, path);
    RoleMap r;
    r.context_cols = {"w"};
    r.outcome_col = "s";
    auto back = ingest_csv(path, r);
    EXPECT_EQ(back.column("s").values, t.column("s").values);
    EXPECT_EQ(back.column("c").decode(), t.column("c").decode());
}

TEST(Split, SizesAndDeterminism) {
    auto a = split_indices(100, 0.33, 42);
    EXPECT_EQ(a.train.size(), 67u);
    EXPECT_EQ(a.test.size(), 33u);
    auto b = split_indices(100, 0.33, 42);
    EXPECT_EQ(a.test, b.test);
    EXPECT_EQ(a.train, b.train);
}

TEST(Split, DifferentSeedsGiveDifferentPartitions) {
    auto a = split_indices(100, 0.33, 1);
    auto b = split_indices(100, 0.33, 2);
    EXPECT_NE(a.test, b.test);
}

TEST(Split, DegenerateMinimum) {
    auto s = split_indices(2, 0.33, 5);
    EXPECT_EQ(s.train.size(), 1u);
    EXPECT_EQ(s.test.size(), 1u);
    EXPECT_THROW(split_indices(1, 0.33, 5), DataError);
    EXPECT_EQ(held_out_count(10, 0.25), 3u);  // 2.5 rounds up
    EXPECT_EQ(held_out_count(10, 0.99), 9u);  // clamp keeps a training row
}

TEST(Split, PartitionProperty) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng() % 500;
        const double frac = 0.01 + 0.98 * static_cast<double>(rng() % 1000) / 1000.0;
        auto s = split_indices(n, frac, rng());
        std::vector<int> seen(n, 0);
        for (auto i : s.train) ++seen.at(i);
        for (auto i : s.test) ++seen.at(i);
        ASSERT_TRUE(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
        ASSERT_EQ(s.test.size(), held_out_count(n, frac));
    }
}

TEST(Split, TableSplitCarriesColumns) {
    AuditTable t({Column::discrete("w", {0, 1, 2, 3, 4, 5}), Column::real("y", {0, .2, .4, .6, .8, 1})});
    SplitSpec spec;
    spec.seed = 3;
    auto [train, test] = split(t, spec);
    EXPECT_EQ(train.n_rows() + test.n_rows(), 6u);
    EXPECT_EQ(test.n_rows(), 2u);
    for (std::size_t i = 0; i < test.n_rows(); ++i) {
        EXPECT_DOUBLE_EQ(test.column("y").values[i], test.column("w").values[i] * 0.2);
    }
    spec.test_fraction = 1.0;
    EXPECT_THROW(split(t, spec), ConfigError);
}
