// Serial reference kernels against their OpenMP versions.
#include <benchmark/benchmark.h>

#include <random>

#include "k3f/counting.hpp"

using namespace k3f;

namespace {

struct Pair {
    FiniteOrthGroup G;
    Subgroup H, K;
};

const Pair& pair() {
    static Pair p = [] {
        FiniteOrthGroup G = orthogonal_group(discriminant_form(lattice_from_expression("U(2)^2 + [-2]^2")).q);
        std::mt19937_64 rng(1);
        Subgroup H = subgroup_generated(G, std::vector<uint32_t>{uint32_t(rng() % G.order())});
        Subgroup K = subgroup_generated(G, std::vector<uint32_t>{uint32_t(rng() % G.order()), uint32_t(rng() % G.order())});
        return Pair{std::move(G), std::move(H), std::move(K)};
    }();
    return p;
}

void BM_DoubleCosetsSerial(benchmark::State& st) {
    const Pair& p = pair();
    for (auto _ : st) benchmark::DoNotOptimize(double_cosets_burnside_serial(p.G, p.H, p.K));
}

void BM_DoubleCosetsOpenMP(benchmark::State& st) {
    const Pair& p = pair();
    for (auto _ : st) benchmark::DoNotOptimize(double_cosets_burnside(p.G, p.H, p.K));
}

void BM_DoubleCosetsPartition(benchmark::State& st) {
    const Pair& p = pair();
    for (auto _ : st) benchmark::DoNotOptimize(double_cosets_partition(p.G, p.H, p.K));
}

void BM_HodgeLifts(benchmark::State& st) {
    GramLattice T = lattice_from_expression("U(2)^2");
    bool parallel = st.range(0) != 0;
    for (auto _ : st) benchmark::DoNotOptimize(hodge_lifts(T, 12, 4, parallel));
}

}  // namespace

BENCHMARK(BM_DoubleCosetsSerial);
BENCHMARK(BM_DoubleCosetsOpenMP);
BENCHMARK(BM_DoubleCosetsPartition);
BENCHMARK(BM_HodgeLifts)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
