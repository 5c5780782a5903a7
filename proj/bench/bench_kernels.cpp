// Serial reference against the OpenMP path for the three parallel kernels.

#include <benchmark/benchmark.h>

#include "intent/evaluation.hpp"
#include "intent/simgen.hpp"

using namespace intent;

namespace {

const sim::Corpus& corpus() {
  static const sim::Corpus c = sim::build_corpus(sim::expand_mix({}), SceneConfig::demo());
  return c;
}

models::Exec exec_of(const benchmark::State& s) {
  return s.range(0) ? models::Exec::Parallel : models::Exec::Serial;
}

void BM_KnnBatch(benchmark::State& state) {
  const auto& data = corpus().dataset.data;
  const auto model = models::knn_fit(data, models::FeatureMask::all(), 11);
  for (auto _ : state) benchmark::DoNotOptimize(models::knn_predict_batch(model, data.x, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.size()));
}

void BM_CrossValidate(benchmark::State& state) {
  const auto& data = corpus().dataset.data;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        models::cross_validate(data, models::FeatureMask::all(), models::KnnSpec{11}, 5, 1, exec_of(state)));
}

void BM_BuildCorpus(benchmark::State& state) {
  const auto specs = sim::expand_mix({});
  const auto scene = SceneConfig::demo();
  for (auto _ : state) benchmark::DoNotOptimize(sim::build_corpus(specs, scene, exec_of(state)));
}

}  // namespace

BENCHMARK(BM_KnnBatch)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CrossValidate)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BuildCorpus)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
