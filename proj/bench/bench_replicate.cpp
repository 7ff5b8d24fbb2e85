// Serial reference vs OpenMP replication of the same Monte Carlo risk.
// Both paths must give identical numbers; only wall time differs.

#include "mulreg/experiments.hpp"

#include <benchmark/benchmark.h>

using namespace mulreg;

namespace {

EstimatorSpec adaptive_spec()
{
  EstimatorSpec s;
  s.kind = EstimatorKind::Adaptive;
  s.integrator.nodes_per_axis = 16;
  return s;
}

void run(benchmark::State& state, Backend backend)
{
  const FunctionSpec f = test_function("f1");
  const std::vector<double> y{0.5};
  RunOptions o;
  o.reps = static_cast<std::size_t>(state.range(0));
  o.master_seed = 1;
  o.backend = backend;
  o.workers = backend == Backend::Serial ? 1 : resolve_workers(0);
  double risk = 0.0;
  for (auto _ : state) {
    risk = mc_risk(adaptive_spec(), f, y, 100, 1, o).risk;
    benchmark::DoNotOptimize(risk);
  }
  state.counters["workers"] = o.workers;
  state.counters["reps_per_s"] = benchmark::Counter(static_cast<double>(o.reps) * state.iterations(),
                                                    benchmark::Counter::kIsRate);
  state.counters["risk"] = risk;
}

void BM_serial(benchmark::State& state) { run(state, Backend::Serial); }
void BM_openmp(benchmark::State& state) { run(state, Backend::OpenMP); }

} // namespace

BENCHMARK(BM_serial)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_openmp)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
