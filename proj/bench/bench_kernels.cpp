// Restart sums: serial reference against the OpenMP kernel.

#include <benchmark/benchmark.h>

#include "ddctl/kernels.hpp"

namespace {

ddctl::Plant make_plant(int n) {
  Eigen::MatrixXd A = 0.9 / n * Eigen::MatrixXd::Ones(n, n);
  Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, 2);
  return ddctl::Plant(ddctl::LtiSystem(A, B));
}

void BM_RestartSerial(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ddctl::Plant plant = make_plant(n);
  const Eigen::VectorXd z = Eigen::VectorXd::Ones(n);
  const Eigen::MatrixXd L = Eigen::MatrixXd::Identity(2, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ddctl::restart_sums_serial(plant, z, L, 2000, 1));
  }
  state.SetItemsProcessed(state.iterations() * 2000);
}

void BM_RestartParallel(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ddctl::Plant plant = make_plant(n);
  const Eigen::VectorXd z = Eigen::VectorXd::Ones(n);
  const Eigen::MatrixXd L = Eigen::MatrixXd::Identity(2, 2);
  const int threads = ddctl::resolve_threads(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ddctl::restart_sums_parallel(plant, z, L, 2000, 1, threads));
  }
  state.SetItemsProcessed(state.iterations() * 2000);
  state.counters["threads"] = threads;
}

}  // namespace

BENCHMARK(BM_RestartSerial)->Arg(2)->Arg(8)->Arg(16);
BENCHMARK(BM_RestartParallel)->Arg(2)->Arg(8)->Arg(16);

BENCHMARK_MAIN();
