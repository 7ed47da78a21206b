#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "subjaudit/corpus.hpp"

namespace subjaudit {

/// Lowercases ASCII letters and splits on maximal runs of characters that
/// are not ASCII alphanumerics. Bytes >= 0x80 are treated as word
/// characters, so multi-byte UTF-8 sequences stay inside their token.
std::vector<std::string> tokenize(std::string_view text);

/// All n-grams of length 1..ngram_max, shorter first, parts joined by one space.
std::vector<std::string> ngrams(const std::vector<std::string>& tokens, int ngram_max);

struct VocabularyOptions {
  int ngram_max = 2;
  std::size_t min_df = 2;
};

/// Term -> column mapping with document frequencies. Columns are assigned in
/// lexicographic term order.
class Vocabulary {
 public:
  Vocabulary() = default;
  /// `terms` must be sorted and unique; `doc_freq` aligned with it.
  Vocabulary(std::vector<std::string> terms, std::vector<std::size_t> doc_freq,
             std::size_t n_docs, int ngram_max);

  std::size_t size() const { return terms_.size(); }
  std::size_t n_docs() const { return n_docs_; }
  int ngram_max() const { return ngram_max_; }
  const std::string& term(std::size_t column) const { return terms_[column]; }
  const std::vector<std::string>& terms() const { return terms_; }
  std::size_t doc_freq(std::size_t column) const { return doc_freq_[column]; }
  std::optional<std::size_t> find(std::string_view term) const;

  /// ln((1 + n_docs) / (1 + df)) + 1
  double idf(std::size_t column) const;

  /// Text format: a header line `subjaudit-vocabulary 1 <n_docs> <ngram_max> <size>`
  /// followed by one `<doc_freq>\t<term>` line per column in column order.
  void save(std::ostream& out) const;
  static Vocabulary load(std::istream& in);

  bool operator==(const Vocabulary& other) const {
    return terms_ == other.terms_ && doc_freq_ == other.doc_freq_ && n_docs_ == other.n_docs_ &&
           ngram_max_ == other.ngram_max_;
  }

 private:
  std::vector<std::string> terms_;
  std::vector<std::size_t> doc_freq_;
  std::size_t n_docs_ = 0;
  int ngram_max_ = 1;
  std::unordered_map<std::string, std::size_t> index_;
};

Vocabulary build_vocabulary(std::span<const std::string> texts, const VocabularyOptions& options = {});
Vocabulary build_vocabulary(const LabeledCorpus& corpus, const VocabularyOptions& options = {});

struct SparseEntry {
  std::uint32_t column = 0;
  double value = 0.0;
  bool operator==(const SparseEntry&) const = default;
};

/// Compressed sparse rows; column indices are strictly increasing within a row.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  explicit SparseMatrix(std::size_t n_cols) : n_cols_(n_cols) {}

  std::size_t rows() const { return offsets_.size() - 1; }
  std::size_t cols() const { return n_cols_; }
  std::size_t nnz() const { return entries_.size(); }
  std::span<const SparseEntry> row(std::size_t r) const {
    return {entries_.data() + offsets_[r], offsets_[r + 1] - offsets_[r]};
  }

  /// Appends a row; entries are sorted by column and zero values dropped.
  /// Throws InvalidArgument on duplicate or out-of-range columns.
  void append_row(std::vector<SparseEntry> entries);

  SparseMatrix select_rows(std::span<const std::size_t> indices) const;

  /// Text format: header `subjaudit-sparse 1 <rows> <cols>` then one line per
  /// row of space-separated `column:value` pairs (values printed with %.17g).
  void save(std::ostream& out) const;
  static SparseMatrix load(std::istream& in);

  bool operator==(const SparseMatrix&) const = default;

 private:
  std::size_t n_cols_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<SparseEntry> entries_;
};

/// tf(d,t) * idf(t) with raw counts; out-of-vocabulary n-grams are ignored.
/// With `normalize`, every nonzero row is scaled to unit L2 norm.
SparseMatrix tfidf_transform(std::span<const std::string> texts, const Vocabulary& vocab,
                             bool normalize = true);
SparseMatrix tfidf_transform(const LabeledCorpus& corpus, const Vocabulary& vocab,
                             bool normalize = true);

/// Same sparsity pattern with every value set to 1.
SparseMatrix binarize(const SparseMatrix& matrix);

}  // namespace subjaudit
