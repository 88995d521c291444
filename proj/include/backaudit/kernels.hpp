#pragma once

// Row-parallel reductions used by the estimators. Every kernel exists twice:
// `serial` is the plain single-loop reference kept for testing, `parallel`
// is the OpenMP version the library calls.
//
// Parallel floating-point reductions run over fixed row chunks and combine
// the chunk partials in chunk order, so results do not depend on the thread
// count or schedule. They may differ from the serial loop in the last bits.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace backaudit::kernels {

inline constexpr std::size_t kChunkRows = std::size_t{1} << 14;

struct GroupSums {
    std::size_t count = 0;
    double sum_y = 0.0;
    double sum_h = 0.0;
    double sum_yh = 0.0;
    double sum_y2 = 0.0;
    double sum_h2 = 0.0;

    GroupSums& operator+=(const GroupSums& o);
};

namespace serial {

std::vector<GroupSums> group_sums(std::span<const std::uint32_t> group, std::size_t n_groups,
                                  std::span<const double> y, std::span<const double> h);
std::size_t count_mismatches(std::span<const double> a, std::span<const double> b);
double sum_squared_diff(std::span<const double> a, std::span<const double> b);
/// out[i] = lookup[group[i]]
void gather(std::span<const std::uint32_t> group, std::span<const double> lookup,
            std::span<double> out);

}  // namespace serial

namespace parallel {

std::vector<GroupSums> group_sums(std::span<const std::uint32_t> group, std::size_t n_groups,
                                  std::span<const double> y, std::span<const double> h);
std::size_t count_mismatches(std::span<const double> a, std::span<const double> b);
double sum_squared_diff(std::span<const double> a, std::span<const double> b);
void gather(std::span<const std::uint32_t> group, std::span<const double> lookup,
            std::span<double> out);

}  // namespace parallel

/// Worker threads OpenMP will use (1 when built without OpenMP).
int max_threads();

}  // namespace backaudit::kernels
