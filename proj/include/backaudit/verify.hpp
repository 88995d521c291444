#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "backaudit/backward.hpp"
#include "backaudit/groups.hpp"
#include "backaudit/oracle.hpp"
#include "backaudit/protocols.hpp"

namespace backaudit {

/// Seeds the repository ships for the oracle checks: kShippedSeedBase + i.
inline constexpr std::uint64_t kShippedSeedBase = 1;
inline constexpr int kShippedSeedCount = 10;

std::vector<std::uint64_t> seed_range(std::uint64_t base, int count);

struct VerifyOptions {
    std::size_t n = 200000;
    std::uint64_t seed_base = kShippedSeedBase;
    int seeds = kShippedSeedCount;
    /// Added to group 0's outcome probabilities after the analytic values
    /// are computed; a non-zero value must make the convergence claims fail.
    double perturb_q = 0.0;
    /// Random-config sweep for the basic one-sided properties.
    int sweep_configs = 20;
    std::size_t sweep_n = 50000;
};

struct ClaimResult {
    std::string name;
    bool passed = false;
    double observed = 0.0;
    double bound = 0.0;
    std::string detail;
};

/// Joins runs made on independently drawn datasets (one seed each) into one
/// result per protocol, so the per-seed spread includes sampling noise.
std::vector<ProtocolResult> pool_runs(const std::vector<std::vector<ProtocolResult>>& runs);

std::vector<ClaimResult> run_verification(const VerifyOptions& options);

/// True when the zero-one g_h fitted on binary `h` takes one value across
/// groups, except in groups whose label frequency is within three binomial
/// standard errors of 1/2 (where the majority is decided by noise).
bool rounded_constant_up_to_noise(const ContextColumn& contexts, std::span<const double> h);

/// Mean and standard error (sample sd / sqrt(n)) of a sample.
struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};
MeanSe mean_se(std::span<const double> xs);

}  // namespace backaudit
