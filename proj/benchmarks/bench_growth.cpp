#include <benchmark/benchmark.h>

#include "idla/engine.hpp"

namespace {

const idla::LatticeGeometry geom3(3);

void BM_grow_plain(benchmark::State& state) {
    const auto particles = std::int64_t(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state) {
        idla::Cluster c = idla::grow(geom3, particles, idla::RngStream(1, seed++));
        benchmark::DoNotOptimize(c.count());
    }
    state.SetItemsProcessed(state.iterations() * particles);
}
BENCHMARK(BM_grow_plain)->Arg(2000)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_grow_accelerated(benchmark::State& state) {
    const auto particles = std::int64_t(state.range(0));
    const auto kernels = idla::build_kernel_ladder(3, 16);
    std::uint64_t seed = 0;
    for (auto _ : state) {
        idla::Cluster c = idla::grow(geom3, particles, idla::RngStream(1, seed++), &kernels);
        benchmark::DoNotOptimize(c.count());
    }
    state.SetItemsProcessed(state.iterations() * particles);
}
BENCHMARK(BM_grow_accelerated)->Arg(20000)->Arg(200000)->Unit(benchmark::kMillisecond);

void BM_kernel_build(benchmark::State& state) {
    const int h = int(state.range(0));
    for (auto _ : state) {
        const idla::JumpKernel k = idla::build_jump_kernel(3, h);
        benchmark::DoNotOptimize(k.orbits().size());
    }
}
BENCHMARK(BM_kernel_build)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_stopped_growth(benchmark::State& state) {
    const idla::Site y(8, 0, 0);
    std::uint64_t seed = 0;
    for (auto _ : state) {
        const auto sc = idla::grow_stopped(geom3, y, 1, 2000, idla::RngStream(2, seed++));
        benchmark::DoNotOptimize(sc.total_mass());
    }
}
BENCHMARK(BM_stopped_growth)->Unit(benchmark::kMillisecond);

}  // namespace
