#include "fixtures.hpp"

namespace bench {

const subjaudit::SyntheticCorpus& corpus(std::size_t n_docs) {
  static std::map<std::size_t, subjaudit::SyntheticCorpus> cache;
  auto it = cache.find(n_docs);
  if (it == cache.end()) {
    auto spec = subjaudit::subjective_preset();
    spec.n_docs = n_docs;
    it = cache.emplace(n_docs, subjaudit::generate_synthetic(spec)).first;
  }
  return it->second;
}

subjaudit::DenseMatrix gaussian_points(std::size_t n, std::size_t dim, std::uint64_t seed) {
  subjaudit::Rng rng(seed);
  subjaudit::DenseMatrix X(n, dim);
  for (std::size_t i = 0; i < n; ++i) {
    const double shift = i % 2 ? 3.0 : 0.0;
    for (std::size_t c = 0; c < dim; ++c) X(i, c) = rng.normal() + shift;
  }
  return X;
}

}  // namespace bench

BENCHMARK_MAIN();
