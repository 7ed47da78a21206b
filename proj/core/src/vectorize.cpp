#include "subjaudit/vectorize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "subjaudit/error.hpp"

namespace subjaudit {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

// Distinct n-grams of one document, sorted.
std::vector<std::string> distinct_ngrams(std::string_view text, int ngram_max) {
  auto grams = ngrams(tokenize(text), ngram_max);
  std::sort(grams.begin(), grams.end());
  grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
  return grams;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_word_byte(c)) {
      current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<std::string> ngrams(const std::vector<std::string>& tokens, int ngram_max) {
  if (ngram_max < 1) throw InvalidArgument("ngrams: ngram_max must be >= 1");
  std::vector<std::string> out;
  out.reserve(tokens.size() * static_cast<std::size_t>(ngram_max));
  for (std::size_t n = 1; n <= static_cast<std::size_t>(ngram_max) && n <= tokens.size(); ++n) {
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string gram = tokens[i];
      for (std::size_t k = 1; k < n; ++k) gram += ' ' + tokens[i + k];
      out.push_back(std::move(gram));
    }
  }
  return out;
}

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<std::size_t> doc_freq,
                       std::size_t n_docs, int ngram_max)
    : terms_(std::move(terms)), doc_freq_(std::move(doc_freq)), n_docs_(n_docs), ngram_max_(ngram_max) {
  if (terms_.size() != doc_freq_.size()) throw InvalidArgument("Vocabulary: terms/doc_freq size mismatch");
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (i > 0 && !(terms_[i - 1] < terms_[i])) {
      throw InvalidArgument("Vocabulary: terms must be sorted and unique");
    }
    if (doc_freq_[i] < 1 || doc_freq_[i] > n_docs_) {
      throw InvalidArgument("Vocabulary: doc_freq out of range for term '" + terms_[i] + "'");
    }
    index_.emplace(terms_[i], i);
  }
}

std::optional<std::size_t> Vocabulary::find(std::string_view term) const {
  const auto it = index_.find(std::string(term));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double Vocabulary::idf(std::size_t column) const {
  return std::log((1.0 + static_cast<double>(n_docs_)) /
                  (1.0 + static_cast<double>(doc_freq_[column]))) + 1.0;
}

void Vocabulary::save(std::ostream& out) const {
  out << "subjaudit-vocabulary 1 " << n_docs_ << ' ' << ngram_max_ << ' ' << terms_.size() << '\n';
  for (std::size_t i = 0; i < terms_.size(); ++i) out << doc_freq_[i] << '\t' << terms_[i] << '\n';
  if (!out) throw IoError("failed writing vocabulary");
}

Vocabulary Vocabulary::load(std::istream& in) {
  std::string magic;
  int version = 0;
  std::size_t n_docs = 0, size = 0;
  int ngram_max = 0;
  if (!(in >> magic >> version >> n_docs >> ngram_max >> size) || magic != "subjaudit-vocabulary" ||
      version != 1) {
    throw IoError("not a subjaudit vocabulary file");
  }
  in.ignore(1);
  std::vector<std::string> terms;
  std::vector<std::size_t> df;
  terms.reserve(size);
  df.reserve(size);
  std::string line;
  while (terms.size() < size && std::getline(in, line)) {
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw IoError("malformed vocabulary line: " + line);
    std::size_t value = 0;
    const auto res = std::from_chars(line.data(), line.data() + tab, value);
    if (res.ec != std::errc{}) throw IoError("malformed vocabulary line: " + line);
    df.push_back(value);
    terms.push_back(line.substr(tab + 1));
  }
  if (terms.size() != size) throw IoError("truncated vocabulary file");
  return Vocabulary(std::move(terms), std::move(df), n_docs, ngram_max);
}

Vocabulary build_vocabulary(std::span<const std::string> texts, const VocabularyOptions& options) {
  if (texts.empty()) throw InvalidArgument("build_vocabulary: empty corpus");
  if (options.ngram_max < 1 || options.ngram_max > 2) {
    throw InvalidArgument("build_vocabulary: ngram_max must be 1 or 2");
  }
  if (options.min_df < 1) throw InvalidArgument("build_vocabulary: min_df must be >= 1");

  std::unordered_map<std::string, std::size_t> df;
  for (const auto& text : texts) {
    for (auto& gram : distinct_ngrams(text, options.ngram_max)) ++df[std::move(gram)];
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  kept.reserve(df.size());
  for (auto& [term, count] : df) {
    if (count >= options.min_df) kept.emplace_back(term, count);
  }
  std::sort(kept.begin(), kept.end());
  std::vector<std::string> terms;
  std::vector<std::size_t> freqs;
  terms.reserve(kept.size());
  freqs.reserve(kept.size());
  for (auto& [term, count] : kept) {
    terms.push_back(std::move(term));
    freqs.push_back(count);
  }
  return Vocabulary(std::move(terms), std::move(freqs), texts.size(), options.ngram_max);
}

Vocabulary build_vocabulary(const LabeledCorpus& corpus, const VocabularyOptions& options) {
  const auto texts = corpus.texts();
  return build_vocabulary(std::span<const std::string>(texts), options);
}

void SparseMatrix::append_row(std::vector<SparseEntry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const SparseEntry& a, const SparseEntry& b) { return a.column < b.column; });
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].column >= n_cols_) throw InvalidArgument("SparseMatrix: column out of range");
    if (i > 0 && entries[i].column == entries[i - 1].column) {
      throw InvalidArgument("SparseMatrix: duplicate column in row");
    }
    if (!std::isfinite(entries[i].value)) throw InvalidArgument("SparseMatrix: non-finite value");
    if (entries[i].value != 0.0) entries_.push_back(entries[i]);
  }
  offsets_.push_back(entries_.size());
}

SparseMatrix SparseMatrix::select_rows(std::span<const std::size_t> indices) const {
  SparseMatrix out(n_cols_);
  for (const auto r : indices) {
    const auto src = row(r);
    out.entries_.insert(out.entries_.end(), src.begin(), src.end());
    out.offsets_.push_back(out.entries_.size());
  }
  return out;
}

void SparseMatrix::save(std::ostream& out) const {
  out << "subjaudit-sparse 1 " << rows() << ' ' << cols() << '\n';
  char buf[64];
  for (std::size_t r = 0; r < rows(); ++r) {
    bool first = true;
    for (const auto& e : row(r)) {
      std::snprintf(buf, sizeof(buf), "%u:%.17g", e.column, e.value);
      if (!first) out << ' ';
      out << buf;
      first = false;
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing sparse matrix");
}

SparseMatrix SparseMatrix::load(std::istream& in) {
  std::string magic;
  int version = 0;
  std::size_t n_rows = 0, n_cols = 0;
  if (!(in >> magic >> version >> n_rows >> n_cols) || magic != "subjaudit-sparse" || version != 1) {
    throw IoError("not a subjaudit sparse matrix file");
  }
  in.ignore(1);
  SparseMatrix m(n_cols);
  std::string line;
  for (std::size_t r = 0; r < n_rows; ++r) {
    if (!std::getline(in, line)) throw IoError("truncated sparse matrix file");
    std::istringstream ls(line);
    std::vector<SparseEntry> entries;
    std::string pair;
    while (ls >> pair) {
      const auto colon = pair.find(':');
      if (colon == std::string::npos) throw IoError("malformed sparse entry: " + pair);
      SparseEntry e;
      e.column = static_cast<std::uint32_t>(std::stoul(pair.substr(0, colon)));
      e.value = std::stod(pair.substr(colon + 1));
      entries.push_back(e);
    }
    m.append_row(std::move(entries));
  }
  return m;
}

SparseMatrix tfidf_transform(std::span<const std::string> texts, const Vocabulary& vocab, bool normalize) {
  SparseMatrix out(vocab.size());
  std::unordered_map<std::size_t, double> counts;
  for (const auto& text : texts) {
    counts.clear();
    for (const auto& gram : ngrams(tokenize(text), vocab.ngram_max())) {
      if (const auto col = vocab.find(gram)) counts[*col] += 1.0;
    }
    std::vector<SparseEntry> row;
    row.reserve(counts.size());
    double norm2 = 0.0;
    for (const auto& [col, tf] : counts) {
      const double w = tf * vocab.idf(col);
      row.push_back({static_cast<std::uint32_t>(col), w});
    }
    std::sort(row.begin(), row.end(),
              [](const SparseEntry& a, const SparseEntry& b) { return a.column < b.column; });
    for (const auto& e : row) norm2 += e.value * e.value;
    if (normalize && norm2 > 0.0) {
      const double inv = 1.0 / std::sqrt(norm2);
      for (auto& e : row) e.value *= inv;
    }
    out.append_row(std::move(row));
  }
  return out;
}

SparseMatrix tfidf_transform(const LabeledCorpus& corpus, const Vocabulary& vocab, bool normalize) {
  const auto texts = corpus.texts();
  return tfidf_transform(std::span<const std::string>(texts), vocab, normalize);
}

SparseMatrix binarize(const SparseMatrix& matrix) {
  SparseMatrix out(matrix.cols());
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    std::vector<SparseEntry> row(matrix.row(r).begin(), matrix.row(r).end());
    for (auto& e : row) e.value = 1.0;
    out.append_row(std::move(row));
  }
  return out;
}

}  // namespace subjaudit
