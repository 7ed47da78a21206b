#include "fixtures.hpp"
#include "subjaudit/classify.hpp"
#include "subjaudit/vectorize.hpp"

using namespace subjaudit;

namespace {

void BM_TfidfTransform(benchmark::State& state) {
  const auto& c = bench::corpus(static_cast<std::size_t>(state.range(0)));
  const auto vocab = build_vocabulary(c.corpus);
  for (auto _ : state) benchmark::DoNotOptimize(tfidf_transform(c.corpus, vocab));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TfidfTransform)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_TrainSvm(benchmark::State& state) {
  const auto& c = bench::corpus(static_cast<std::size_t>(state.range(0)));
  const auto X = tfidf_transform(c.corpus, build_vocabulary(c.corpus));
  const auto y = c.corpus.labels(c.corpus.target_classes().front());
  SvmOptions opt;
  opt.parallel = false;
  for (auto _ : state) benchmark::DoNotOptimize(train_svm(X, y, opt));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainSvm)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

}  // namespace
