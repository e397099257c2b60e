// Parallel kernels vs. the serial reference implementations on a speckled
// 256x256 phantom, so the OpenMP split can be judged per primitive.
#include <benchmark/benchmark.h>

#include "ttv/core_ops.hpp"
#include "ttv/fuzzy.hpp"
#include "ttv/metrics.hpp"
#include "ttv/noise.hpp"
#include "ttv/phantom.hpp"
#include "ttv/reference.hpp"
#include "ttv/solvers.hpp"

namespace {

const ttv::ImageGrid& fixture() {
    static const ttv::ImageGrid img =
        ttv::apply_speckle(ttv::make_circle(256), ttv::NoiseSpec{4, 7});
    return img;
}

const ttv::EdgeIndicatorField& theta_fixture() {
    static const ttv::EdgeIndicatorField th =
        ttv::edge_indicator(fixture(), ttv::default_templates(), {0.05, 0.0});
    return th;
}

void bm_convolve_omp(benchmark::State& state) {
    const ttv::Kernel2D k = ttv::gaussian_kernel(1.5, 4);
    for (auto _ : state) benchmark::DoNotOptimize(ttv::convolve(fixture(), k));
}
BENCHMARK(bm_convolve_omp);

void bm_convolve_serial(benchmark::State& state) {
    const ttv::Kernel2D k = ttv::gaussian_kernel(1.5, 4);
    for (auto _ : state)
        benchmark::DoNotOptimize(ttv::reference::convolve(fixture(), k));
}
BENCHMARK(bm_convolve_serial);

void bm_edge_indicator_omp(benchmark::State& state) {
    const auto templates = ttv::default_templates();
    for (auto _ : state)
        benchmark::DoNotOptimize(ttv::edge_indicator(fixture(), templates, {0.05, 0.0}));
}
BENCHMARK(bm_edge_indicator_omp);

void bm_edge_indicator_serial(benchmark::State& state) {
    const auto templates = ttv::default_templates();
    for (auto _ : state)
        benchmark::DoNotOptimize(
            ttv::reference::edge_indicator(fixture(), templates, {0.05, 0.0}));
}
BENCHMARK(bm_edge_indicator_serial);

void bm_tv_divergence_omp(benchmark::State& state) {
    for (auto _ : state)
        benchmark::DoNotOptimize(
            ttv::tv_divergence(fixture(), theta_fixture(), 0.02));
}
BENCHMARK(bm_tv_divergence_omp);

void bm_tv_divergence_serial(benchmark::State& state) {
    for (auto _ : state)
        benchmark::DoNotOptimize(
            ttv::reference::tv_divergence(fixture(), theta_fixture(), 0.02,
                                          ttv::FluxForm::conservative));
}
BENCHMARK(bm_tv_divergence_serial);

void bm_mssim_omp(benchmark::State& state) {
    const ttv::ImageGrid clean = ttv::make_circle(256);
    for (auto _ : state) benchmark::DoNotOptimize(ttv::mssim(clean, fixture()));
}
BENCHMARK(bm_mssim_omp);

void bm_mssim_serial(benchmark::State& state) {
    const ttv::ImageGrid clean = ttv::make_circle(256);
    for (auto _ : state)
        benchmark::DoNotOptimize(ttv::reference::mssim(clean, fixture()));
}
BENCHMARK(bm_mssim_serial);

void bm_proposed_step(benchmark::State& state) {
    ttv::SolverParams p = ttv::default_params(ttv::Filter::proposed);
    for (auto _ : state) {
        ttv::SolverState s{fixture(), fixture(), 0, 0.0};
        ttv::telegraph_step(s, theta_fixture(), fixture(), p);
        benchmark::DoNotOptimize(s.curr);
    }
}
BENCHMARK(bm_proposed_step);

}  // namespace

BENCHMARK_MAIN();
