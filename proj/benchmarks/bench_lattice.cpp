#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>

#include "reflecta/coset_union.hpp"
#include "reflecta/lattice.hpp"

using namespace reflecta;

namespace {

Mat random_matrix(std::mt19937_64& rng, int n, int entries) {
    std::uniform_int_distribution<int> d(-9, 9);
    Mat rows;
    for (int i = 0; i < entries; ++i) {
        Vec r;
        for (int j = 0; j < n; ++j) r.push_back(d(rng));
        rows.push_back(std::move(r));
    }
    return rows;
}

void bm_hnf(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::mt19937_64 rng(12345);
    std::vector<Mat> inputs;
    for (int i = 0; i < 64; ++i) inputs.push_back(random_matrix(rng, n, 2 * n));
    std::size_t k = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(hnf(inputs[k++ % inputs.size()]));
    }
}
BENCHMARK(bm_hnf)->Arg(2)->Arg(4)->Arg(8);

void bm_intersect(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::mt19937_64 rng(99);
    std::vector<std::pair<Lattice, Lattice>> inputs;
    for (int i = 0; i < 64; ++i)
        inputs.emplace_back(hnf(random_matrix(rng, n, n + 1)), hnf(random_matrix(rng, n, n + 1)));
    std::size_t k = 0;
    for (auto _ : state) {
        const auto& [a, b] = inputs[k++ % inputs.size()];
        benchmark::DoNotOptimize(lat_intersect(a, b));
    }
}
BENCHMARK(bm_intersect)->Arg(2)->Arg(4)->Arg(8);

void bm_coset_minkowski(benchmark::State& state) {
    // The three-coset plane union against itself: the shape that dominates
    // the closure checks on extension data.
    CosetUnion s = coset_union({{Int(0), Int(0)}, {Int(1), Int(0)}, {Int(0), Int(1)}},
                               lattice_diag({Int(2), Int(2)}));
    for (auto _ : state) {
        benchmark::DoNotOptimize(cu_minkowski(s, s));
    }
}
BENCHMARK(bm_coset_minkowski);

void bm_quotient(benchmark::State& state) {
    Lattice A = lattice_full(3);
    Lattice M = lattice_diag({Int(4), Int(4), Int(4)});
    for (auto _ : state) {
        benchmark::DoNotOptimize(quotient(A, M));
    }
}
BENCHMARK(bm_quotient);

}  // namespace

BENCHMARK_MAIN();
