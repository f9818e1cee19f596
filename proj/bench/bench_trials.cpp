#include <benchmark/benchmark.h>

#include <thread>

#include "estimlab/expharness.hpp"

using namespace estimlab;

namespace {

expharness::ExperimentConfig lin_config(std::uint64_t trials) {
  ffmat::PrimeField f(2);
  expharness::ExperimentConfig c{expharness::LinSetting{2, 12, 10, learners::LinFamily::Kind::D01},
                                 learners::LinearBiasERM{linclass::canonical_bias(f, 12, 10)},
                                 estimators::ParityOptimalDet{}};
  c.trials = trials;
  c.seed = 1;
  c.keep_records = false;
  return c;
}

expharness::ExperimentConfig shattered_config(std::uint64_t trials) {
  expharness::ExperimentConfig c{expharness::ShatteredSetting{50, 25}, learners::UniformShatteredERM{},
                                 estimators::EmpiricalLoss{}};
  c.trials = trials;
  c.seed = 1;
  c.keep_records = false;
  return c;
}

void BM_LinSerial(benchmark::State& st) {
  const auto c = lin_config(static_cast<std::uint64_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(expharness::run_experiment_serial(c).summary.failures);
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_LinParallel(benchmark::State& st) {
  auto c = lin_config(static_cast<std::uint64_t>(st.range(0)));
  c.workers = static_cast<unsigned>(st.range(1));
  for (auto _ : st) benchmark::DoNotOptimize(expharness::run_experiment(c).summary.failures);
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_ShatteredSerial(benchmark::State& st) {
  const auto c = shattered_config(static_cast<std::uint64_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(expharness::run_experiment_serial(c).summary.failures);
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_ShatteredParallel(benchmark::State& st) {
  auto c = shattered_config(static_cast<std::uint64_t>(st.range(0)));
  c.workers = static_cast<unsigned>(st.range(1));
  for (auto _ : st) benchmark::DoNotOptimize(expharness::run_experiment(c).summary.failures);
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

void BM_RankHistogram(benchmark::State& st) {
  const auto w = static_cast<unsigned>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(expharness::rank_histogram(2, 16, 16, 20000, 1, w));
  st.SetItemsProcessed(st.iterations() * 20000);
}

void worker_args(benchmark::internal::Benchmark* b) {
  const long hw = std::max(1u, std::thread::hardware_concurrency());
  for (long w = 1; w <= hw; w *= 2) b->Args({20000, w});
  if ((hw & (hw - 1)) != 0) b->Args({20000, hw});
}

void rank_args(benchmark::internal::Benchmark* b) {
  const long hw = std::max(1u, std::thread::hardware_concurrency());
  for (long w = 1; w <= hw; w *= 2) b->Arg(w);
}

}  // namespace

BENCHMARK(BM_LinSerial)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LinParallel)->Apply(worker_args)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ShatteredSerial)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ShatteredParallel)->Apply(worker_args)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RankHistogram)->Apply(rank_args)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
