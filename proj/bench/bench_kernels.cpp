#include <benchmark/benchmark.h>

#include "trimer/integrator.hpp"
#include "trimer/oracle.hpp"

namespace {

trimer::SystemParams weakly_nonlinear() {
  trimer::SystemParams p;
  p.chi = 1e-3;
  p.epsilon = 10.0;
  return p;
}

trimer::IntegrationConfig short_ensemble(std::int64_t n_traj) {
  trimer::IntegrationConfig c;
  c.dt = 1e-3;
  c.t_final = 1.0;
  c.n_traj = n_traj;
  c.sample_stride = 100;
  return c;
}

void BM_EnsembleReference(benchmark::State& state) {
  const auto p = weakly_nonlinear();
  const auto c = short_ensemble(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(trimer::run_ensemble_reference(p, c));
  state.SetItemsProcessed(state.iterations() * c.n_traj * c.n_steps());
}

void BM_EnsembleParallel(benchmark::State& state) {
  const auto p = weakly_nonlinear();
  const auto c = short_ensemble(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(trimer::run_ensemble(p, c, static_cast<int>(state.range(1))));
  state.SetItemsProcessed(state.iterations() * c.n_traj * c.n_steps());
}

void BM_LiouvillianApply(benchmark::State& state) {
  trimer::SystemParams p;
  p.chi = 0.1;
  p.epsilon = 1.5;
  const int nc = static_cast<int>(state.range(0));
  const trimer::oracle::Liouvillian lv(p, nc);
  const auto rho = trimer::oracle::DensityMatrix::coherent(nc, {0.3, 0.5, 0.3});
  trimer::oracle::DensityMatrix out(nc);
  for (auto _ : state) {
    lv.apply(rho, out, static_cast<int>(state.range(1)));
    benchmark::ClobberMemory();
  }
}

}  // namespace

// items/s is trajectory steps per second
BENCHMARK(BM_EnsembleReference)->Arg(6400)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnsembleParallel)->Args({6400, 1})->Args({6400, 0})->Unit(benchmark::kMillisecond);
// second argument: 1 serial, 0 all OpenMP threads
BENCHMARK(BM_LiouvillianApply)->Args({10, 1})->Args({10, 0})->Args({12, 1})->Args({12, 0})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
