#include "backaudit/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "backaudit/error.hpp"
#include "backaudit/oracle.hpp"
#include "backaudit/report.hpp"
#include "backaudit/verify.hpp"

namespace backaudit::cli {

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError(fmt::format("cannot write '{}'", path));
    out << text;
    if (!out) throw DataError(fmt::format("write to '{}' failed", path));
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            seeds.push_back(std::stoull(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError(fmt::format("invalid seed '{}'", item));
        }
    }
    if (seeds.empty()) throw ConfigError("--seeds is empty");
    return seeds;
}

struct AuditArgs {
    std::string input, roles, loss = "zero_one", protocols = "all", seeds, out, tsv, roc,
        parity_out;
    std::uint64_t seed_base = 0;
    int seed_count = kShippedSeedCount;
    double alpha = 1.0;
    double test_fraction = 0.33;
    double inner_fraction = 0.5;
    double tolerance = kDefaultCalibrationTolerance;
    int bins = 10;
};

void cmd_audit(const AuditArgs& a) {
    RoleConfig rc = load_role_config(a.roles);
    rc.bins.default_bins = a.bins;
    if (a.bins < 1) throw ConfigError("--bins must be >= 1");
    const AuditTable table = ingest_csv(a.input, rc.roles, rc.bins);

    AuditOptions opt;
    opt.kind = parse_loss_kind(a.loss);
    opt.protocols = parse_protocol_list(a.protocols);
    opt.seeds = a.seeds.empty() ? seed_range(a.seed_base, a.seed_count) : parse_seed_list(a.seeds);
    if (opt.seeds.empty()) throw ConfigError("--seed-count must be >= 1");
    opt.split.test_fraction = a.test_fraction;
    opt.split.inner_fraction = a.inner_fraction;
    opt.roc = !a.roc.empty();
    opt.alpha = a.alpha;
    opt.calibration_tolerance = a.tolerance;

    const AuditReport report = build_report(table, rc.roles, opt, file_digest(a.input));
    write_text(a.out, report_json(report));
    if (!a.tsv.empty()) write_text(a.tsv, per_seed_tsv(report));
    if (!a.roc.empty()) write_text(a.roc, roc_tsv(report));
    if (!a.parity_out.empty() && report.parity) {
        AuditTable f({Column::real(fmt::format("f_{}", report.parity->alpha),
                                   report.parity->residual_values)});
        write_csv(f, a.parity_out);
    }
    for (const auto& r : report.protocol_results) {
        std::cout << fmt::format("{:<10} mean {:.6f}  sd {:.6f}  constant {:.6f}\n",
                                 to_string(r.protocol), r.mean, r.stddev, r.constant_reference);
    }
    std::cout << "report written to " << a.out << "\n";
}

struct GenerateArgs {
    std::string config, out, sidecar, roles_out;
    long long n = 1000;
    std::uint64_t seed = 0;
};

void cmd_generate(const GenerateArgs& a) {
    const OracleConfig cfg = a.config.empty() ? reference_config() : load_oracle_config(a.config);
    if (a.n <= 0) throw DataError(fmt::format("--n must be >= 1 (got {})", a.n));
    const AuditTable table = generate(cfg, static_cast<std::size_t>(a.n), a.seed);
    write_csv(table, a.out);
    const std::string sidecar = a.sidecar.empty() ? a.out + ".oracle.json" : a.sidecar;
    write_text(sidecar, oracle_analytics_json(analyze(cfg)) + "\n");
    const std::string roles = a.roles_out.empty() ? a.out + ".roles.json" : a.roles_out;
    write_text(roles, role_config_json(oracle_roles(cfg)) + "\n");
    std::cout << fmt::format("wrote {} rows to {} (analytics: {}, roles: {})\n", a.n, a.out,
                             sidecar, roles);
}

struct VerifyArgs {
    long long n = 200000;
    std::uint64_t seed_base = kShippedSeedBase;
    int seeds = kShippedSeedCount;
    double perturb_q = 0.0;
    int sweep_configs = 20;
};

bool cmd_verify(const VerifyArgs& a) {
    if (a.n < 2) throw DataError(fmt::format("--n must be >= 2 (got {})", a.n));
    VerifyOptions opt;
    opt.n = static_cast<std::size_t>(a.n);
    opt.seed_base = a.seed_base;
    opt.seeds = a.seeds;
    opt.perturb_q = a.perturb_q;
    opt.sweep_configs = a.sweep_configs;
    opt.sweep_n = std::min<std::size_t>(opt.sweep_n, opt.n);
    const auto claims = run_verification(opt);
    bool ok = true;
    for (const auto& c : claims) {
        ok &= c.passed;
        std::cout << fmt::format("[{}] {}  observed {:.3e}  bound {:.3e}{}{}\n",
                                 c.passed ? "PASS" : "FAIL", c.name, c.observed, c.bound,
                                 c.detail.empty() ? "" : "  ", c.detail);
    }
    std::cout << (ok ? "all claims passed\n" : "one or more claims FAILED\n");
    return ok;
}

void configure_logging() {
    spdlog::set_level(spdlog::level::warn);
    if (const char* level = std::getenv("BACKAUDIT_LOG_LEVEL")) {
        spdlog::set_level(spdlog::level::from_str(level));
    }
}

}  // namespace

int run(const std::vector<std::string>& args) {
    configure_logging();
    CLI::App app{"Backward-baseline auditing for black-box predictors"};
    app.require_subcommand(1);

    AuditArgs audit;
    auto* a = app.add_subcommand("audit", "Run the evaluation protocols and diagnostics on a CSV");
    a->add_option("--input", audit.input, "Input CSV")->required();
    a->add_option("--roles", audit.roles, "Role configuration (JSON)")->required();
    a->add_option("--loss", audit.loss, "zero_one or squared");
    a->add_option("--protocols", audit.protocols, "Comma-separated protocols or 'all'");
    a->add_option("--seeds", audit.seeds, "Comma-separated split seeds");
    a->add_option("--seed-base", audit.seed_base, "First of --seed-count consecutive seeds");
    a->add_option("--seed-count", audit.seed_count, "Number of consecutive seeds");
    a->add_option("--out", audit.out, "Report path (JSON)")->required();
    a->add_option("--tsv", audit.tsv, "Per-seed losses (TSV)");
    a->add_option("--roc", audit.roc, "ROC points per seed (TSV)");
    a->add_option("--alpha", audit.alpha, "Residualization strength in [0,1]");
    a->add_option("--parity-out", audit.parity_out, "Residualized values (CSV)");
    a->add_option("--bins", audit.bins, "Default quantile bins for numeric context columns");
    a->add_option("--test-fraction", audit.test_fraction, "Held-out fraction");
    a->add_option("--inner-fraction", audit.inner_fraction, "Second split fraction for WhatYYhat");
    a->add_option("--tolerance", audit.tolerance, "Weak-calibration tolerance");

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Write synthetic oracle data with known baselines");
    g->add_option("--config", gen.config, "Oracle config (JSON); default is the reference config");
    g->add_option("--n", gen.n, "Row count");
    g->add_option("--seed", gen.seed, "Generator seed");
    g->add_option("--out", gen.out, "Output CSV")->required();
    g->add_option("--sidecar", gen.sidecar, "Analytic values (JSON); default <out>.oracle.json");
    g->add_option("--roles-out", gen.roles_out, "Role file; default <out>.roles.json");

    VerifyArgs ver;
    auto* v = app.add_subcommand("verify", "Check every property claim on fresh oracle data");
    v->add_option("--n", ver.n, "Rows per generated dataset");
    v->add_option("--seed-base", ver.seed_base, "First seed");
    v->add_option("--seeds", ver.seeds, "Number of seeds");
    v->add_option("--sweep-configs", ver.sweep_configs, "Random configs in the sweep");
    v->add_option("--perturb-q", ver.perturb_q,
                  "Shift group 0's outcome probabilities after computing analytic values");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "configuration error: " << e.what() << "\n\n" << app.help();
        return exit_code(ErrorCategory::configuration);
    }

    try {
        if (a->parsed()) {
            cmd_audit(audit);
        } else if (g->parsed()) {
            cmd_generate(gen);
        } else if (v->parsed()) {
            if (!cmd_verify(ver)) return exit_code(ErrorCategory::diagnostic);
        }
    } catch (const AuditError& e) {
        std::cerr << category_name(e.category()) << " error: " << e.what() << "\n";
        return exit_code(e.category());
    } catch (const std::exception& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return exit_code(ErrorCategory::data);
    }
    return 0;
}

}  // namespace backaudit::cli
