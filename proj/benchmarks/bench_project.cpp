#include "fixtures.hpp"
#include "subjaudit/project.hpp"

using namespace subjaudit;

namespace {

void BM_ConditionalAffinities(benchmark::State& state) {
  const auto X = bench::gaussian_points(static_cast<std::size_t>(state.range(0)), 100, 1);
  for (auto _ : state) benchmark::DoNotOptimize(conditional_affinities(X, 30.0));
}
BENCHMARK(BM_ConditionalAffinities)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_ExactGradient(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto P = conditional_affinities(bench::gaussian_points(n, 20, 2), 30.0).P;
  const auto Y = bench::gaussian_points(n, 2, 3);
  for (auto _ : state) benchmark::DoNotOptimize(kl_gradient(P, Y));
}
BENCHMARK(BM_ExactGradient)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_BarnesHutGradient(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto P = detail::knn_affinities(bench::gaussian_points(n, 20, 4), 30.0);
  const auto Y = bench::gaussian_points(n, 2, 5);
  for (auto _ : state) {
    double z = 0.0;
    benchmark::DoNotOptimize(detail::bh_gradient(P, Y, 1.0, 0.5, &z));
  }
}
BENCHMARK(BM_BarnesHutGradient)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Tsne(benchmark::State& state) {
  const auto X = bench::gaussian_points(static_cast<std::size_t>(state.range(0)), 100, 6);
  TsneOptions opt;
  opt.iterations = 300;
  for (auto _ : state) benchmark::DoNotOptimize(tsne(X, opt));
}
BENCHMARK(BM_Tsne)->Arg(500)->Unit(benchmark::kSecond)->Iterations(1);

}  // namespace
