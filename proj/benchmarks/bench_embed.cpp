#include <vector>

#include "fixtures.hpp"
#include "subjaudit/embed.hpp"

using namespace subjaudit;

namespace {

void BM_PairGradient(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  auto vec = [&] {
    std::vector<double> v(dim);
    for (auto& x : v) x = 0.1 * rng.normal();
    return v;
  };
  const auto v = vec(), u = vec();
  std::vector<std::vector<double>> negs;
  for (int k = 0; k < 5; ++k) negs.push_back(vec());
  const std::vector<std::span<const double>> spans(negs.begin(), negs.end());
  for (auto _ : state) benchmark::DoNotOptimize(sg_neg_gradient(v, u, spans));
}
BENCHMARK(BM_PairGradient)->Arg(100)->Arg(300);

void BM_TrainPvdbow(benchmark::State& state) {
  const auto& c = bench::corpus(static_cast<std::size_t>(state.range(0)));
  EmbeddingOptions opt;
  opt.dim = 100;
  opt.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train_pvdbow(c.corpus, opt));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainPvdbow)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_InferVector(benchmark::State& state) {
  const auto& c = bench::corpus(1000);
  EmbeddingOptions opt;
  opt.dim = 100;
  opt.epochs = 2;
  const auto model = train_pvdbow(c.corpus, opt);
  const auto& text = c.corpus.documents().front().text;
  for (auto _ : state) benchmark::DoNotOptimize(infer_vector(model, text));
}
BENCHMARK(BM_InferVector)->Unit(benchmark::kMicrosecond);

}  // namespace
