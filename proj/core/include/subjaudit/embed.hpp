#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "subjaudit/corpus.hpp"
#include "subjaudit/dense.hpp"
#include "subjaudit/rng.hpp"

namespace subjaudit {

struct EmbeddingOptions {
  std::size_t dim = 300;
  std::size_t min_count = 10;
  std::size_t negatives = 5;
  int epochs = 10;
  /// Accepted for parity with PV-DM style configs; PV-DBOW has no context
  /// window and ignores it.
  std::size_t window = 8;
  double alpha = 0.025;
  double min_alpha = 0.0001;
  std::uint64_t seed = 1;
  /// Number of (document, word) pairs in the fixed batch used to track the
  /// training objective.
  std::size_t objective_sample = 512;
};

/// Draws word indices with probability proportional to count^power.
class NegativeSampler {
 public:
  NegativeSampler() = default;
  NegativeSampler(std::span<const std::uint64_t> counts, double power = 0.75);

  std::size_t draw(Rng& rng) const;
  double probability(std::size_t word) const;
  std::size_t size() const { return cdf_.size(); }

 private:
  std::vector<double> cdf_;
};

/// Gradients of the single-pair negative-sampling loss
///   L = -log s(v.u_target) - sum_k log s(-v.u_neg_k)
/// (s = logistic function), multiplied by `scale`.
struct PairGradient {
  double loss = 0.0;
  std::vector<double> doc;
  std::vector<double> target;
  std::vector<std::vector<double>> negatives;
};

PairGradient sg_neg_gradient(std::span<const double> doc_vector, std::span<const double> target,
                             std::span<const std::span<const double>> negatives, double scale = 1.0);

/// Trained PV-DBOW parameters. Immutable after training.
class EmbeddingModel {
 public:
  EmbeddingModel() = default;
  EmbeddingModel(EmbeddingOptions options, std::vector<std::string> doc_ids, DenseMatrix doc_vectors,
                 std::vector<std::string> words, std::vector<std::uint64_t> word_counts,
                 DenseMatrix word_vectors, std::vector<double> objective_trace);

  const EmbeddingOptions& options() const { return options_; }
  std::size_t dim() const { return options_.dim; }
  const std::vector<std::string>& doc_ids() const { return doc_ids_; }
  const DenseMatrix& doc_vectors() const { return doc_vectors_; }
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::uint64_t>& word_counts() const { return word_counts_; }
  const DenseMatrix& word_vectors() const { return word_vectors_; }
  const NegativeSampler& sampler() const { return sampler_; }
  std::optional<std::size_t> word_index(std::string_view word) const;
  /// Mean pair loss on the fixed batch: index 0 before training, then one
  /// entry per epoch.
  const std::vector<double>& objective_trace() const { return objective_trace_; }

  /// Binary little-endian format: magic "SJPVDBOW", u32 version (1), the
  /// option block, then doc ids, doc vectors, words with counts, word
  /// vectors and the objective trace. Strings are u64 length + bytes,
  /// matrices are u64 rows, u64 cols, then f64 values row-major.
  void save(const std::filesystem::path& path) const;
  static EmbeddingModel load(const std::filesystem::path& path);

  bool operator==(const EmbeddingModel& other) const;

 private:
  EmbeddingOptions options_;
  std::vector<std::string> doc_ids_;
  DenseMatrix doc_vectors_;
  std::vector<std::string> words_;
  std::vector<std::uint64_t> word_counts_;
  DenseMatrix word_vectors_;
  std::vector<double> objective_trace_;
  std::unordered_map<std::string, std::size_t> index_;
  NegativeSampler sampler_;
};

/// Single-threaded, deterministic PV-DBOW training with negative sampling.
/// Throws InvalidArgument when no word survives min_count pruning.
EmbeddingModel train_pvdbow(std::span<const std::string> ids, std::span<const std::string> texts,
                            const EmbeddingOptions& options);
EmbeddingModel train_pvdbow(const LabeledCorpus& corpus, const EmbeddingOptions& options);

struct InferredVector {
  std::vector<double> values;
  /// True when the text had no in-vocabulary word; `values` is then zero.
  bool all_oov = false;
};

/// Optimizes a fresh document vector against frozen word vectors for
/// `steps` passes over the text's words.
InferredVector infer_vector(const EmbeddingModel& model, std::string_view text, int steps = 20,
                            std::uint64_t seed = 1);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// CSV `id,label,d0,...` (label column omitted when `labels` is empty).
void write_embeddings_csv(const std::filesystem::path& path, std::span<const std::string> ids,
                          std::span<const std::string> labels, const DenseMatrix& vectors);

struct EmbeddingTable {
  std::vector<std::string> ids;
  std::vector<std::string> labels;
  DenseMatrix vectors;
};
EmbeddingTable read_embeddings_csv(const std::filesystem::path& path);

}  // namespace subjaudit
