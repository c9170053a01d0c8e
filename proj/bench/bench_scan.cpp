#include "rkbs/admissibility.hpp"

#include <benchmark/benchmark.h>
#include <omp.h>

using namespace rkbs;

namespace {

OperatorKernel bench_kernel() { return {ScalarKernelSpec::t_family(0.7), TaskCoupling::identity(2), 2.0}; }

CertificationConfig bench_config(int max_centers) {
    CertificationConfig cfg;
    cfg.max_centers = max_centers;
    cfg.trials = 50;
    cfg.grid_size = 256;
    cfg.seed = 3;
    return cfg;
}

void BM_LebesgueScanParallel(benchmark::State& state) {
    const OperatorKernel k = bench_kernel();
    const CertificationConfig cfg = bench_config(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(lebesgue_scan(k, cfg));
    state.counters["threads"] = omp_get_max_threads();
}

void BM_LebesgueScanSerial(benchmark::State& state) {
    const OperatorKernel k = bench_kernel();
    const CertificationConfig cfg = bench_config(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(reference::lebesgue_scan_serial(k, cfg));
}

void BM_KappaScanParallel(benchmark::State& state) {
    const OperatorKernel k = bench_kernel();
    for (auto _ : state) benchmark::DoNotOptimize(kappa_scan(k, static_cast<int>(state.range(0))));
    state.counters["threads"] = omp_get_max_threads();
}

void BM_KappaScanSerial(benchmark::State& state) {
    const OperatorKernel k = bench_kernel();
    for (auto _ : state) benchmark::DoNotOptimize(reference::kappa_scan_serial(k, static_cast<int>(state.range(0))));
}

}  // namespace

BENCHMARK(BM_LebesgueScanParallel)->Arg(3)->Arg(6)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LebesgueScanSerial)->Arg(3)->Arg(6)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KappaScanParallel)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KappaScanSerial)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
