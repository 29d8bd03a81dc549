// Serial reference kernels against their OpenMP versions.
#include <benchmark/benchmark.h>

#include <map>

#include "nodal/brownian_sheet.hpp"
#include "nodal/covariance.hpp"
#include "nodal/field_sampler.hpp"
#include "nodal/nodal_measure.hpp"

using namespace nodal;

namespace {

const EmbeddingPlan& plan_for(int R) {
  static std::map<int, EmbeddingPlan> plans;
  auto it = plans.find(R);
  if (it == plans.end()) {
    it = plans.emplace(R, plan_embedding(make_model("bargmann-fock", 2), make_grid(2, R, 0.05))).first;
  }
  return it->second;
}

void BM_SampleFieldPair(benchmark::State& state) {
  const EmbeddingPlan& plan = plan_for(static_cast<int>(state.range(0)));
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(sample_field_pair(plan, seed++));
}

void BM_SampleFieldPairSerial(benchmark::State& state) {
  const EmbeddingPlan& plan = plan_for(static_cast<int>(state.range(0)));
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(sample_field_pair_serial(plan, seed++));
}

void BM_NodalLength(benchmark::State& state) {
  const FieldSample f = sample_field(plan_for(static_cast<int>(state.range(0))), 3);
  for (auto _ : state) benchmark::DoNotOptimize(nodal_length_cells(f, 100));
}

void BM_NodalLengthSerial(benchmark::State& state) {
  const FieldSample f = sample_field(plan_for(static_cast<int>(state.range(0))), 3);
  for (auto _ : state) benchmark::DoNotOptimize(nodal_length_cells_serial(f, 100));
}

void BM_SampleSheet(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(sample_sheet(n, 2, seed++));
}

void BM_SampleSheetSerial(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(sample_sheet_serial(n, 2, seed++));
}

}  // namespace

BENCHMARK(BM_SampleFieldPair)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SampleFieldPairSerial)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_NodalLength)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_NodalLengthSerial)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SampleSheet)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SampleSheetSerial)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
