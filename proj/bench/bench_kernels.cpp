#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>
#include <vector>

#include "backaudit/kernels.hpp"

namespace {

namespace k = backaudit::kernels;

constexpr std::size_t kGroups = 64;

struct Data {
    std::vector<std::uint32_t> group;
    std::vector<double> y;
    std::vector<double> h;
    std::vector<double> lookup;
};

const Data& data(std::size_t n) {
    static std::size_t cached_n = 0;
    static Data d;
    if (cached_n != n) {
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        d.group.resize(n);
        d.y.resize(n);
        d.h.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            d.group[i] = static_cast<std::uint32_t>(rng() % kGroups);
            d.y[i] = static_cast<double>(rng() % 2);
            d.h[i] = u(rng);
        }
        d.lookup.assign(kGroups, 0.0);
        for (std::size_t g = 0; g < kGroups; ++g) d.lookup[g] = u(rng);
        cached_n = n;
    }
    return d;
}

template <auto Fn>
void group_sums(benchmark::State& state) {
    const auto& d = data(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(Fn(d.group, kGroups, d.y, d.h));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Fn>
void sum_squared_diff(benchmark::State& state) {
    const auto& d = data(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(Fn(d.y, d.h));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Fn>
void count_mismatches(benchmark::State& state) {
    const auto& d = data(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(Fn(d.y, d.y));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Fn>
void gather(benchmark::State& state) {
    const auto& d = data(static_cast<std::size_t>(state.range(0)));
    std::vector<double> out(d.group.size());
    for (auto _ : state) {
        Fn(d.group, d.lookup, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

#define BACKAUDIT_PAIR(name)                                                                  \
    BENCHMARK(name<k::serial::name>)->Name(#name "/serial")->RangeMultiplier(8)->Range(1 << 14, 1 << 23); \
    BENCHMARK(name<k::parallel::name>)->Name(#name "/parallel")->RangeMultiplier(8)->Range(1 << 14, 1 << 23)

BACKAUDIT_PAIR(group_sums);
BACKAUDIT_PAIR(sum_squared_diff);
BACKAUDIT_PAIR(count_mismatches);
BACKAUDIT_PAIR(gather);

BENCHMARK_MAIN();
