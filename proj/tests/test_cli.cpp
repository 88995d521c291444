#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "backaudit/cli.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run(std::vector<std::string> args) { return backaudit::cli::run(args); }

int run_quiet(std::vector<std::string> args, std::string* out = nullptr) {
    testing::internal::CaptureStdout();
    testing::internal::CaptureStderr();
    const int code = run(std::move(args));
    const std::string text = testing::internal::GetCapturedStdout();
    testing::internal::GetCapturedStderr();
    if (out) *out = text;
    return code;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("backaudit_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    void generate(long long n) {
        ASSERT_EQ(run_quiet({"generate", "--n", std::to_string(n), "--seed", "5", "--out",
                             path("data.csv")}),
                  0);
    }

    fs::path dir_;
};

}  // namespace

TEST_F(CliTest, GenerateWritesCsvSidecarAndRoles) {
    generate(1000);
    std::ifstream in(path("data.csv"));
    std::string header, line;
    std::getline(in, header);
    EXPECT_EQ(header,
              "w,x_w,u,noise_0,noise_1,y,bayes_score,bayes_class,backward_class,backward_score,"
              "forward_class,forward_score");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 1000);

    auto sidecar = nlohmann::json::parse(slurp(path("data.csv.oracle.json")));
    EXPECT_NEAR(sidecar["baseline_losses"]["zero_one"].get<double>(), 0.4, 1e-12);
    auto roles = nlohmann::json::parse(slurp(path("data.csv.roles.json")));
    EXPECT_EQ(roles["outcome"], "y");
}

TEST_F(CliTest, GenerateZeroRowsIsDataError) {
    EXPECT_EQ(run_quiet({"generate", "--n", "0", "--out", path("x.csv")}), 3);
}

TEST_F(CliTest, GenerateBadConfigIsConfigurationError) {
    std::ofstream(path("cfg.json")) << R"({"group_probs": [0.5, 0.6], "forward_levels": 1,
        "outcome_probs": [[0.1], [0.2]]})";
    EXPECT_EQ(run_quiet({"generate", "--config", path("cfg.json"), "--out", path("x.csv")}), 2);
}

TEST_F(CliTest, AuditShapeAndDeterminism) {
    generate(5000);
    const std::vector<std::string> base{"audit", "--input", path("data.csv"), "--roles",
                                        path("data.csv.roles.json"), "--protocols",
                                        "XYY,WYY,WYYhat,WhatYYhat"};
    auto a = base;
    a.insert(a.end(), {"--out", path("a.json"), "--tsv", path("a.tsv"), "--roc", path("a_roc.tsv"),
                       "--parity-out", path("f.csv")});
    auto b = base;
    b.insert(b.end(), {"--out", path("b.json"), "--roc", path("b_roc.tsv")});
    ASSERT_EQ(run_quiet(a), 0);
    ASSERT_EQ(run_quiet(b), 0);

    const std::string report_a = slurp(path("a.json"));
    EXPECT_EQ(report_a, slurp(path("b.json")));

    auto j = nlohmann::json::parse(report_a);
    ASSERT_EQ(j["protocol_results"].size(), 4u);
    for (const auto& r : j["protocol_results"]) EXPECT_EQ(r["per_seed_losses"].size(), 10u);

    std::ifstream tsv(path("a.tsv"));
    std::string line;
    int lines = 0;
    while (std::getline(tsv, line)) ++lines;
    EXPECT_EQ(lines, 1 + 4 * 10);
    EXPECT_EQ(slurp(path("a_roc.tsv")), slurp(path("b_roc.tsv")));
    EXPECT_TRUE(fs::exists(path("f.csv")));
}

TEST_F(CliTest, AuditSeedsChangeReport) {
    generate(2000);
    const std::vector<std::string> base{"audit", "--input", path("data.csv"), "--roles",
                                        path("data.csv.roles.json")};
    auto a = base;
    a.insert(a.end(), {"--seeds", "1,2,3", "--out", path("a.json")});
    auto b = base;
    b.insert(b.end(), {"--seeds", "4,5,6", "--out", path("b.json")});
    ASSERT_EQ(run_quiet(a), 0);
    ASSERT_EQ(run_quiet(b), 0);
    EXPECT_NE(slurp(path("a.json")), slurp(path("b.json")));
}

TEST_F(CliTest, ErrorCategories) {
    generate(200);
    // Missing --roles: configuration error plus usage text.
    testing::internal::CaptureStdout();
    testing::internal::CaptureStderr();
    EXPECT_EQ(run({"audit", "--input", path("data.csv"), "--out", path("r.json")}), 2);
    testing::internal::GetCapturedStdout();
    const std::string err = testing::internal::GetCapturedStderr();
    EXPECT_NE(err.find("configuration error"), std::string::npos);
    EXPECT_NE(err.find("--roles"), std::string::npos);

    const std::string roles = path("data.csv.roles.json");
    EXPECT_EQ(run_quiet({"audit", "--input", path("missing.csv"), "--roles", roles, "--out",
                         path("r.json")}),
              3);
    EXPECT_EQ(run_quiet({"audit", "--input", path("data.csv"), "--roles", roles, "--loss",
                         "hinge", "--out", path("r.json")}),
              2);
    EXPECT_EQ(run_quiet({"audit", "--input", path("data.csv"), "--roles", roles, "--alpha", "2",
                         "--out", path("r.json")}),
              2);
    EXPECT_EQ(run_quiet({"audit", "--input", path("data.csv"), "--roles", roles, "--seeds", "x",
                         "--out", path("r.json")}),
              2);

    std::ofstream(path("bad.csv")) << "w,y,bayes_class\n0,1,1\n1,maybe,0\n";
    std::ofstream(path("bad_roles.json")) << R"({"context": "w", "outcome": "y", "prediction": "bayes_class"})";
    EXPECT_EQ(run_quiet({"audit", "--input", path("bad.csv"), "--roles", path("bad_roles.json"),
                         "--out", path("r.json")}),
              3);
    EXPECT_EQ(run_quiet({"frobnicate"}), 2);
    EXPECT_EQ(run_quiet({}), 2);
}

TEST_F(CliTest, VerifySmallSampleNamesClaims) {
    std::string out;
    const int code = run_quiet({"verify", "--n", "100", "--seeds", "2", "--sweep-configs", "2"}, &out);
    EXPECT_TRUE(code == 0 || code == 4) << code;
    EXPECT_NE(out.find("observed"), std::string::npos);
    EXPECT_NE(out.find("bound"), std::string::npos);
}

TEST_F(CliTest, VerifyDetectsPerturbedOracle) {
    std::string out;
    EXPECT_EQ(run_quiet({"verify", "--n", "20000", "--seeds", "3", "--sweep-configs", "1",
                         "--perturb-q", "0.1"},
                        &out),
              4);
    EXPECT_NE(out.find("[FAIL]"), std::string::npos);
    EXPECT_NE(out.find("convergence"), std::string::npos);
}

TEST_F(CliTest, ExecutableRuns) {
    const std::string cmd = std::string("\"") + BACKAUDIT_CLI_PATH + "\" generate --n 0 --out " +
                            path("x.csv") + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    ASSERT_TRUE(WIFEXITED(status));
    EXPECT_EQ(WEXITSTATUS(status), 3);
}
