#include <benchmark/benchmark.h>

#include "idla/green.hpp"
#include "idla/harmonic.hpp"
#include "idla/sandpile.hpp"

namespace {

void BM_green_solve(benchmark::State& state) {
    const int R = int(state.range(0));
    for (auto _ : state) {
        const idla::GreenField gf = idla::compute_green(3, R);
        benchmark::DoNotOptimize(gf.residual);
    }
}
BENCHMARK(BM_green_solve)->Arg(12)->Arg(24)->Unit(benchmark::kMillisecond);

void BM_harmonic_solve(benchmark::State& state) {
    const int s = int(state.range(0));
    idla::Site y;
    y[0] = s;
    for (auto _ : state) {
        const idla::HarmonicField hf = idla::solve_P(3, y, 1);
        benchmark::DoNotOptimize(hf.p0);
    }
}
BENCHMARK(BM_harmonic_solve)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_sandpile(benchmark::State& state) {
    const double r = double(state.range(0));
    for (auto _ : state) {
        const idla::SandpileWeight sw = idla::divisible_sandpile(3, r);
        benchmark::DoNotOptimize(sw.c_inner);
    }
}
BENCHMARK(BM_sandpile)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace
