#include <benchmark/benchmark.h>

#include <string>

#include "parmono/json_io.hpp"
#include "parmono/monodromy.hpp"

using namespace parmono;

namespace {

struct Workload {
    ParamRationalMatrix a;
    std::vector<LoopSpec> loops;
    TGrid grid;
};

/// Three loops of the DH Lax matrix over a segment of t.
Workload dh_workload(int points) {
    Workload w;
    w.a = load_system(std::string(PARMONO_FIXTURES_DIR) + "/dh_lax.json");
    for (int i = 0; i < 3; ++i) w.loops.push_back(LoopSpec{cplx(0.6, -0.4), i, std::nullopt});
    w.grid = TGrid::segment(ParameterPoint{0.0}, ParameterPoint{0.1}, points);
    return w;
}

void BM_GridSerial(benchmark::State& state) {
    const Workload w = dh_workload(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(monodromy_grid_serial(w.a, w.loops, w.grid));
    state.SetItemsProcessed(state.iterations() * state.range(0) * 3);
}

void BM_GridOpenMP(benchmark::State& state) {
    const Workload w = dh_workload(static_cast<int>(state.range(0)));
    const int jobs = static_cast<int>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(monodromy_grid(w.a, w.loops, w.grid, {}, jobs));
    state.SetItemsProcessed(state.iterations() * state.range(0) * 3);
}

}  // namespace

BENCHMARK(BM_GridSerial)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridOpenMP)->Args({8, 0})->Args({32, 0})->Args({32, 2})->Args({32, 4})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
