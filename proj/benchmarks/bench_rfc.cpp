// Microbenchmarks for the hot paths: Gram assembly, weighted FPCA, the
// T/E step, one M-step, and a multistart fit at simulation scale.

#include <benchmark/benchmark.h>

#include "rfc/em.hpp"
#include "rfc/simulate.hpp"

namespace {

using namespace rfc;

const LabeledDataset& dataset() {
  static const LabeledDataset data = make_dataset(
      scenario1(), contamination_scheme(ContaminationScheme::inrange_level), 1);
  return data;
}

const GramMatrix& gram() {
  static const GramMatrix g = gram_matrix(dataset().curves.basis);
  return g;
}

ModelParams reference_params() {
  const auto& data = dataset();
  const GramHalfPowers hp = half_powers(gram());
  return random_init(data.curves.gamma, gram(), hp, 2, {2, 3}, 10.0, 10.0, 7);
}

void BM_GramBspline(benchmark::State& state) {
  const BasisSpec spec = BasisSpec::bspline(static_cast<int>(state.range(0)), 3, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(gram_matrix(spec));
}
BENCHMARK(BM_GramBspline)->Arg(15)->Arg(40);

void BM_WeightedFpca(benchmark::State& state) {
  const auto& data = dataset();
  const GramHalfPowers hp = half_powers(gram());
  const Eigen::VectorXd tau =
      Eigen::VectorXd::Constant(data.curves.gamma.rows(), 0.5);
  for (auto _ : state)
    benchmark::DoNotOptimize(weighted_fpca(data.curves.gamma, tau, gram(), hp));
}
BENCHMARK(BM_WeightedFpca);

void BM_TEStep(benchmark::State& state) {
  const auto& data = dataset();
  const ModelParams params = reference_params();
  for (auto _ : state)
    benchmark::DoNotOptimize(t_and_e_step(data.curves.gamma, params, 0.1, gram()));
}
BENCHMARK(BM_TEStep);

void BM_MStep(benchmark::State& state) {
  const auto& data = dataset();
  const GramHalfPowers hp = half_powers(gram());
  const ModelParams params = reference_params();
  const TEStepResult te = t_and_e_step(data.curves.gamma, params, 0.1, gram());
  for (auto _ : state)
    benchmark::DoNotOptimize(update_group_model(data.curves.gamma, te.posteriors,
                                                gram(), hp, {2, 3}, 10.0, 10.0));
}
BENCHMARK(BM_MStep);

void BM_Fit(benchmark::State& state) {
  const auto& data = dataset();
  FitConfig fc;
  fc.K = 2;
  fc.dims = {2, 3};
  fc.alpha = 0.1;
  fc.d1 = fc.d2 = 10.0;
  fc.nstart = static_cast<int>(state.range(0));
  fc.iter_max = 20;
  fc.seed = 11;
  fc.threads = 1;
  for (auto _ : state)
    benchmark::DoNotOptimize(fit(data.curves.gamma, gram(), fc));
}
BENCHMARK(BM_Fit)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
