#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace subjaudit {

/// Number of Unicode scalar values in a UTF-8 string.
std::size_t utf8_length(std::string_view text);

/// Number of whitespace-separated tokens.
std::size_t word_count(std::string_view text);

struct Document {
  std::string id;
  std::string text;
  /// Target-class name -> user-assigned label.
  std::map<std::string, std::string> labels;
  std::size_t char_count = 0;

  Document() = default;
  Document(std::string id, std::string text, std::map<std::string, std::string> labels);

  /// Label for `target_class`; throws InvalidArgument if absent.
  const std::string& label(const std::string& target_class) const;

  bool operator==(const Document&) const = default;
};

/// An ordered collection of documents that all carry a label for every
/// target class. Immutable once constructed.
class LabeledCorpus {
 public:
  LabeledCorpus() = default;
  /// Throws InvalidArgument when a document lacks a label for one of
  /// `target_classes`, or when `target_classes` is empty.
  LabeledCorpus(std::vector<Document> documents, std::vector<std::string> target_classes);

  const std::vector<Document>& documents() const { return documents_; }
  const Document& operator[](std::size_t i) const { return documents_[i]; }
  std::size_t size() const { return documents_.size(); }
  bool empty() const { return documents_.empty(); }

  /// Target classes in lexicographic order.
  const std::vector<std::string>& target_classes() const { return target_classes_; }
  bool has_class(const std::string& target_class) const;

  /// Distinct labels observed for `target_class`, sorted lexicographically.
  const std::vector<std::string>& label_set(const std::string& target_class) const;

  /// Label of each document for `target_class`, in document order.
  std::vector<std::string> labels(const std::string& target_class) const;
  std::vector<std::string> texts() const;

  /// Corpus of the documents at `indices`, in the given order.
  LabeledCorpus subset(const std::vector<std::size_t>& indices) const;

  bool operator==(const LabeledCorpus&) const = default;

 private:
  void require_class(const std::string& target_class) const;

  std::vector<Document> documents_;
  std::vector<std::string> target_classes_;
  std::map<std::string, std::vector<std::string>> label_sets_;
};

enum class CorpusFormat { jsonl, csv };
enum class OnMissing { skip, error };

CorpusFormat parse_corpus_format(std::string_view name);
OnMissing parse_on_missing(std::string_view name);

struct LoadOptions {
  std::filesystem::path path;
  CorpusFormat format = CorpusFormat::jsonl;
  /// Concatenated in this order, joined by a single '\n'.
  std::vector<std::string> text_fields;
  std::vector<std::string> class_fields;
  /// When unset, the zero-based record index is used as the id.
  std::optional<std::string> id_field;
  OnMissing on_missing = OnMissing::error;
};

/// Reads a JSONL or CSV (header row, RFC 4180 quoting) file.
///
/// Records missing a named field (or holding null) are skipped or rejected
/// per `on_missing`; the error names the zero-based record index. Labels are
/// trimmed of surrounding whitespace. Non-string JSON scalars are rendered
/// with their JSON text, so a numeric rating 5 becomes the label "5".
LabeledCorpus load_corpus(const LoadOptions& options);

/// Writes one JSON object per document with fields id, `text_field` and one
/// field per target class. Reloadable with load_corpus.
void write_jsonl(const LabeledCorpus& corpus, const std::filesystem::path& path,
                 const std::string& text_field = "text", const std::string& id_field = "id");

/// Keeps documents with min_chars <= char_count <= max_chars.
LabeledCorpus filter_by_char_length(
    const LabeledCorpus& corpus, std::size_t min_chars,
    std::size_t max_chars = std::numeric_limits<std::size_t>::max());

/// Keeps documents whose word-count z-score (population sigma) is strictly
/// below `z_max`. When sigma is zero every document is kept.
LabeledCorpus filter_by_length_zscore(const LabeledCorpus& corpus, double z_max);

struct SplitPair {
  LabeledCorpus train;
  LabeledCorpus test;
  std::uint64_t seed = 0;
  /// Positions in the input corpus, ascending.
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

/// Per-label stratified split. Each label contributes round(f * count)
/// documents to train, clamped so both sides get at least one.
SplitPair stratified_split(const LabeledCorpus& corpus, const std::string& target_class,
                           double train_fraction, std::uint64_t seed);

struct LabelShare {
  std::string label;
  std::size_t count = 0;
  double percent = 0.0;
};

/// Sorted by count descending, ties by label.
std::vector<LabelShare> label_distribution(const LabeledCorpus& corpus,
                                           const std::string& target_class);

}  // namespace subjaudit
