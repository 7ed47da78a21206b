#include "fixtures.hpp"
#include "subjaudit/indicative.hpp"
#include "subjaudit/vectorize.hpp"

using namespace subjaudit;

namespace {

void BM_Chi2Table(benchmark::State& state) {
  const auto& c = bench::corpus(static_cast<std::size_t>(state.range(0)));
  const auto vocab = build_vocabulary(c.corpus);
  const auto presence = binarize(tfidf_transform(c.corpus, vocab, false));
  const auto y = c.corpus.labels(c.corpus.target_classes().front());
  for (auto _ : state) benchmark::DoNotOptimize(chi2_table(presence, y));
  state.counters["terms"] = static_cast<double>(vocab.size());
}
BENCHMARK(BM_Chi2Table)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_NfisDistribution(benchmark::State& state) {
  const auto& c = bench::corpus(5000);
  const auto presence = binarize(tfidf_transform(c.corpus, build_vocabulary(c.corpus), false));
  const auto table = chi2_table(presence, c.corpus.labels(c.corpus.target_classes().front()));
  const auto k = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(nfis_distribution(table, k));
}
BENCHMARK(BM_NfisDistribution)->Arg(10)->Arg(100)->Arg(1000);

}  // namespace
