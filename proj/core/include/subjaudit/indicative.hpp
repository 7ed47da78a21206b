#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "subjaudit/dense.hpp"
#include "subjaudit/vectorize.hpp"

namespace subjaudit {

/// Document counts of the 2x2 table term present/absent x label c / not c.
struct ContingencyCounts {
  std::size_t n_tc = 0;    // term present, label c
  std::size_t n_tnc = 0;   // term present, other label
  std::size_t n_ntc = 0;   // term absent, label c
  std::size_t n_ntnc = 0;  // term absent, other label

  std::size_t total() const { return n_tc + n_tnc + n_ntc + n_ntnc; }
  bool operator==(const ContingencyCounts&) const = default;
};

/// Counts from a document-presence matrix (any nonzero entry means present).
/// `y` holds the label index of each row.
ContingencyCounts contingency(const SparseMatrix& presence, std::span<const std::size_t> y,
                              std::size_t term, std::size_t label);

/// N (p(t,c) p(!t,!c) - p(t,!c) p(!t,c))^2 / (p(t) p(!t) p(c) p(!c)), with
/// probabilities taken as counts over N. A zero margin yields 0.
/// Throws InvalidArgument when N = 0.
double chi2(const ContingencyCounts& counts);

/// chi2 for every (term, label) pair.
class ChiSquareTable {
 public:
  ChiSquareTable() = default;
  ChiSquareTable(std::vector<std::string> terms, std::vector<std::string> labels, std::size_t n_docs,
                 DenseMatrix scores);

  std::size_t n_terms() const { return scores_.rows; }
  std::size_t n_labels() const { return labels_.size(); }
  std::size_t n_docs() const { return n_docs_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<std::string>& terms() const { return terms_; }
  double score(std::size_t term, std::size_t label) const { return scores_(term, label); }
  const DenseMatrix& scores() const { return scores_; }

  /// f_c: the scores of every term against `label`.
  std::vector<double> label_scores(std::size_t label) const;
  /// f_t: the scores of `term` against every label.
  std::vector<double> term_scores(std::size_t term) const;

  /// The `n` highest-scoring terms for `label` as (term, score), ties by
  /// lower term index.
  std::vector<std::pair<std::string, double>> top_terms(std::size_t label, std::size_t n) const;

 private:
  std::vector<std::string> terms_;
  std::vector<std::string> labels_;
  std::size_t n_docs_ = 0;
  DenseMatrix scores_;
};

/// Single pass over the presence matrix collecting per-term, per-label
/// document frequencies. `terms` may be empty (columns are then unnamed).
/// Throws InvalidArgument with fewer than two labels.
ChiSquareTable chi2_table(const SparseMatrix& presence, std::span<const std::size_t> y,
                          std::vector<std::string> labels, std::vector<std::string> terms = {});

/// String-label convenience; the label order is the sorted distinct labels.
ChiSquareTable chi2_table(const SparseMatrix& presence, std::span<const std::string> y,
                          std::vector<std::string> terms = {});

/// Sum of the K largest scores divided by the largest score. nullopt when
/// every score is zero (no indicative feature), which is distinct from 0.
/// Throws InvalidArgument when K < 1 or K exceeds the number of scores.
std::optional<double> nfis(std::span<const double> scores, std::size_t K);
std::optional<double> nfis(const ChiSquareTable& table, std::size_t label, std::size_t K);

struct NfisDistribution {
  std::size_t K = 0;
  std::vector<std::string> labels;
  std::vector<std::optional<double>> scores;
  /// max / min over the defined scores; nullopt when none is defined.
  std::optional<double> imbalance;
};

NfisDistribution nfis_distribution(const ChiSquareTable& table, std::size_t K);

}  // namespace subjaudit
