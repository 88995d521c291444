#include "backaudit/kernels.hpp"

namespace backaudit::kernels {

GroupSums& GroupSums::operator+=(const GroupSums& o) {
    count += o.count;
    sum_y += o.sum_y;
    sum_h += o.sum_h;
    sum_yh += o.sum_yh;
    sum_y2 += o.sum_y2;
    sum_h2 += o.sum_h2;
    return *this;
}

namespace serial {

std::vector<GroupSums> group_sums(std::span<const std::uint32_t> group, std::size_t n_groups,
                                  std::span<const double> y, std::span<const double> h) {
    std::vector<GroupSums> out(n_groups);
    for (std::size_t i = 0; i < group.size(); ++i) {
        GroupSums& g = out[group[i]];
        const double yi = y[i];
        const double hi = h[i];
        g.count += 1;
        g.sum_y += yi;
        g.sum_h += hi;
        g.sum_yh += yi * hi;
        g.sum_y2 += yi * yi;
        g.sum_h2 += hi * hi;
    }
    return out;
}

std::size_t count_mismatches(std::span<const double> a, std::span<const double> b) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) n += (a[i] != b[i]);
    return n;
}

double sum_squared_diff(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void gather(std::span<const std::uint32_t> group, std::span<const double> lookup,
            std::span<double> out) {
    for (std::size_t i = 0; i < group.size(); ++i) out[i] = lookup[group[i]];
}

}  // namespace serial
}  // namespace backaudit::kernels
