#include "backaudit/kernels.hpp"

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace backaudit::kernels {

namespace {

std::size_t chunk_count(std::size_t n) { return (n + kChunkRows - 1) / kChunkRows; }

}  // namespace

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace parallel {

std::vector<GroupSums> group_sums(std::span<const std::uint32_t> group, std::size_t n_groups,
                                  std::span<const double> y, std::span<const double> h) {
    const std::size_t n = group.size();
    const std::size_t chunks = chunk_count(n);
    std::vector<std::vector<GroupSums>> partial(chunks);

#pragma omp parallel for schedule(static)
    for (std::size_t c = 0; c < chunks; ++c) {
        const std::size_t lo = c * kChunkRows;
        const std::size_t hi = std::min(n, lo + kChunkRows);
        partial[c] = serial::group_sums(group.subspan(lo, hi - lo), n_groups,
                                        y.subspan(lo, hi - lo), h.subspan(lo, hi - lo));
    }

    std::vector<GroupSums> out(n_groups);
    for (const auto& part : partial) {
        for (std::size_t g = 0; g < n_groups; ++g) out[g] += part[g];
    }
    return out;
}

std::size_t count_mismatches(std::span<const double> a, std::span<const double> b) {
    const auto n = static_cast<std::ptrdiff_t>(a.size());
    std::size_t mismatches = 0;
#pragma omp parallel for schedule(static) reduction(+ : mismatches)
    for (std::ptrdiff_t i = 0; i < n; ++i) mismatches += (a[i] != b[i]);
    return mismatches;
}

double sum_squared_diff(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    const std::size_t chunks = chunk_count(n);
    std::vector<double> partial(chunks, 0.0);
#pragma omp parallel for schedule(static)
    for (std::size_t c = 0; c < chunks; ++c) {
        const std::size_t lo = c * kChunkRows;
        const std::size_t hi = std::min(n, lo + kChunkRows);
        partial[c] = serial::sum_squared_diff(a.subspan(lo, hi - lo), b.subspan(lo, hi - lo));
    }
    double s = 0.0;
    for (double p : partial) s += p;
    return s;
}

void gather(std::span<const std::uint32_t> group, std::span<const double> lookup,
            std::span<double> out) {
    const auto n = static_cast<std::ptrdiff_t>(group.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = lookup[group[i]];
}

}  // namespace parallel
}  // namespace backaudit::kernels
