// Serial reference vs OpenMP kernels over arrays of mismatched cells.

#include <vector>

#include <benchmark/benchmark.h>

#include "fndam/calibration.hpp"
#include "fndam/dam_array.hpp"
#include "fndam/kernels.hpp"

using namespace fndam;

namespace {

std::vector<DamCell> make_cells(std::int64_t n) {
    const DamArray a = DamArray::build(static_cast<std::size_t>(n), default_params(), kDefaultV0,
                                       MismatchSpec{0.001, 1});
    return {a.cells().begin(), a.cells().end()};
}

template <void (*Kernel)(std::span<DamCell>, double)>
void bm_advance(benchmark::State& state) {
    std::vector<DamCell> cells = make_cells(state.range(0));
    for (auto _ : state) {
        Kernel(cells, 1.0);
        benchmark::DoNotOptimize(cells.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <void (*Kernel)(std::span<const DamCell>, std::span<WeightReading>)>
void bm_read(benchmark::State& state) {
    const std::vector<DamCell> cells = make_cells(state.range(0));
    std::vector<WeightReading> out(cells.size());
    for (auto _ : state) {
        Kernel(cells, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <void (*Kernel)(std::span<const DamCell>, std::uint64_t, double, std::span<double>)>
void bm_decay_factors(benchmark::State& state) {
    const std::vector<DamCell> cells = make_cells(state.range(0));
    std::vector<double> factor(cells.size());
    std::uint64_t n = 0;
    for (auto _ : state) {
        Kernel(cells, ++n, 1.0, factor);
        benchmark::DoNotOptimize(factor.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(bm_advance<kernels::advance_serial>)->Name("advance/serial")->RangeMultiplier(8)->Range(1 << 9, 1 << 18);
BENCHMARK(bm_advance<kernels::advance_parallel>)->Name("advance/parallel")->RangeMultiplier(8)->Range(1 << 9, 1 << 18);
BENCHMARK(bm_read<kernels::read_serial>)->Name("read/serial")->RangeMultiplier(8)->Range(1 << 9, 1 << 18);
BENCHMARK(bm_read<kernels::read_parallel>)->Name("read/parallel")->RangeMultiplier(8)->Range(1 << 9, 1 << 18);
BENCHMARK(bm_decay_factors<kernels::decay_factors_serial>)
    ->Name("decay_factors/serial")
    ->RangeMultiplier(8)
    ->Range(1 << 9, 1 << 18);
BENCHMARK(bm_decay_factors<kernels::decay_factors_parallel>)
    ->Name("decay_factors/parallel")
    ->RangeMultiplier(8)
    ->Range(1 << 9, 1 << 18);

BENCHMARK_MAIN();
