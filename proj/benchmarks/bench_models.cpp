#include <benchmark/benchmark.h>

#include "cobb/dataset.hpp"
#include "cobb/evaluation.hpp"
#include "cobb/features.hpp"
#include "cobb/regressors.hpp"

namespace {

using namespace cobb;

const FeatureMatrix& default_matrix() {
  static const FeatureMatrix fm = [] {
    FeatureMatrix m = build_matrix(synthesize_dataset(SyntheticConfig{}));
    const ScalerParams sp = fit_scaler(m.X);
    m.X = apply_scaler(sp, m.X);
    return m;
  }();
  return fm;
}

void BM_SignalStats(benchmark::State& state) {
  const Dataset d = synthesize_dataset(SyntheticConfig{.n_participants = 2});
  std::vector<double> samples;
  for (const auto& c : d.participants[0].signal(EffortSignalKind::ml_force)) {
    samples.insert(samples.end(), c.samples.begin(), c.samples.end());
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(signal_stats(samples));
  }
}
BENCHMARK(BM_SignalStats);

void BM_ExtractFeatures(benchmark::State& state) {
  const Dataset d = synthesize_dataset(SyntheticConfig{.n_participants = 2});
  for (auto _ : state) {
    benchmark::DoNotOptimize(extract_features(d.participants[0]));
  }
}
BENCHMARK(BM_ExtractFeatures);

void BM_SynthesizeDefault(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(synthesize_dataset(SyntheticConfig{}));
  }
}
BENCHMARK(BM_SynthesizeDefault)->Unit(benchmark::kMillisecond);

void BM_FitModel(benchmark::State& state) {
  const FeatureMatrix& fm = default_matrix();
  const Algorithm a = algorithm_roster()[static_cast<std::size_t>(state.range(0))];
  const RegressorSpec spec = default_spec(a);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_model(fm.X, fm.y, spec, 42));
  }
  state.SetLabel(algorithm_name(a));
}
BENCHMARK(BM_FitModel)->DenseRange(0, 12)->Unit(benchmark::kMillisecond);

void BM_CrossValidateTree(benchmark::State& state) {
  const FeatureMatrix fm = build_matrix(synthesize_dataset(SyntheticConfig{}));
  const RegressorSpec spec = default_spec(Algorithm::decision_tree);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        cross_validate(fm, spec, 10, 42, ScalerMode::per_fold));
  }
}
BENCHMARK(BM_CrossValidateTree)->Unit(benchmark::kMillisecond);

void BM_BenchmarkAllModels(benchmark::State& state) {
  const FeatureMatrix fm = build_matrix(synthesize_dataset(SyntheticConfig{}));
  std::vector<RegressorSpec> specs;
  for (Algorithm a : algorithm_roster()) specs.push_back(default_spec(a));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        benchmark_models(fm, specs, 10, 42, ScalerMode::per_fold));
  }
}
BENCHMARK(BM_BenchmarkAllModels)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace

BENCHMARK_MAIN();
