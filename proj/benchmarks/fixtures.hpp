#pragma once

#include <benchmark/benchmark.h>

#include <map>

#include "subjaudit/dense.hpp"
#include "subjaudit/groundtruth.hpp"
#include "subjaudit/rng.hpp"

namespace bench {

/// Subjective-preset corpus of the given size, generated once per process.
const subjaudit::SyntheticCorpus& corpus(std::size_t n_docs);

/// Two interleaved Gaussian clouds.
subjaudit::DenseMatrix gaussian_points(std::size_t n, std::size_t dim, std::uint64_t seed);

}  // namespace bench
