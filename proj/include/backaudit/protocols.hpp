#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "backaudit/losses.hpp"
#include "backaudit/table.hpp"

namespace backaudit {

/// Evaluation methods, named by (baseline input, fit target, scored target):
///   XYY        user predictions scored against Y on the test split
///   WYY        fit on (W, Y) train, score against Y test   (backward prediction)
///   WhatYY     fit on (W, Ŷ) test, score against Y test
///   WYYhat     fit on (W, Y) test, score against Ŷ test
///   WhatYYhat  fit on (W, Ŷ) test part A, score against Ŷ test part B
///              (backward rounding)
/// WhatYY and WYYhat fit on the same test rows they score, mirroring the
/// published reference procedure.
enum class Protocol { XYY, WYY, WhatYY, WYYhat, WhatYYhat };

inline constexpr Protocol kAllProtocols[] = {Protocol::XYY, Protocol::WYY, Protocol::WhatYY,
                                             Protocol::WYYhat, Protocol::WhatYYhat};

std::string_view to_string(Protocol p);
Protocol parse_protocol(std::string_view text);
/// Comma-separated list; "all" selects every protocol.
std::vector<Protocol> parse_protocol_list(std::string_view text);

/// Throws ConfigError naming the protocol and the missing role.
void check_roles(Protocol p, const RoleMap& roles);

struct ProtocolEvaluation {
    double loss = 0.0;
    /// Constant-baseline loss on the targets the protocol scores against.
    double constant_reference = 0.0;
    std::size_t fit_rows = 0;
    std::size_t eval_rows = 0;
};

ProtocolEvaluation evaluate_protocol(const AuditTable& table, const RoleMap& roles,
                                     Protocol protocol, LossKind kind, const SplitSpec& split);

double run_protocol(const AuditTable& table, const RoleMap& roles, Protocol protocol,
                    LossKind kind, const SplitSpec& split);

struct ProtocolResult {
    Protocol protocol = Protocol::XYY;
    LossKind kind = LossKind::zero_one;
    std::vector<double> per_seed_losses;
    std::vector<double> per_seed_constant_references;
    double mean = 0.0;
    /// Sample standard deviation (n-1); 0 for a single seed.
    double stddev = 0.0;
    double constant_reference = 0.0;

    double standard_error() const;
};

/// Fills mean, stddev and constant_reference from the per-seed vectors.
void summarize(ProtocolResult& result);

/// sqrt(se_a^2 + se_b^2)
double combined_standard_error(const ProtocolResult& a, const ProtocolResult& b);

/// Runs every protocol for every seed. Seeds are evaluated in parallel;
/// results keep seed-list order. `split` supplies the fractions, its seed is
/// ignored.
std::vector<ProtocolResult> run_audit(const AuditTable& table, const RoleMap& roles,
                                      std::span<const Protocol> protocols, LossKind kind,
                                      std::span<const std::uint64_t> seeds,
                                      const SplitSpec& split = {});

}  // namespace backaudit
