#include "subjaudit/indicative.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "subjaudit/error.hpp"

namespace subjaudit {

namespace {

bool row_has(std::span<const SparseEntry> row, std::size_t column) {
  const auto it = std::lower_bound(row.begin(), row.end(), column,
                                   [](const SparseEntry& e, std::size_t c) { return e.column < c; });
  return it != row.end() && it->column == column && it->value != 0.0;
}

// Indices ordered by descending score, ties by ascending index.
std::vector<std::size_t> ranked(std::span<const double> scores, std::size_t n) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  n = std::min(n, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
                    });
  idx.resize(n);
  return idx;
}

}  // namespace

ContingencyCounts contingency(const SparseMatrix& presence, std::span<const std::size_t> y,
                              std::size_t term, std::size_t label) {
  if (y.size() != presence.rows()) throw InvalidArgument("contingency: label count does not match rows");
  if (term >= presence.cols()) throw InvalidArgument("contingency: unknown term index");
  ContingencyCounts counts;
  bool label_seen = false;
  for (std::size_t d = 0; d < presence.rows(); ++d) {
    const bool has_term = row_has(presence.row(d), term);
    const bool is_c = y[d] == label;
    label_seen = label_seen || is_c;
    if (has_term) {
      ++(is_c ? counts.n_tc : counts.n_tnc);
    } else {
      ++(is_c ? counts.n_ntc : counts.n_ntnc);
    }
  }
  if (!label_seen && (y.empty() || label > *std::max_element(y.begin(), y.end()))) {
    throw InvalidArgument("contingency: unknown label index");
  }
  return counts;
}

double chi2(const ContingencyCounts& counts) {
  const auto total = counts.total();
  if (total == 0) throw InvalidArgument("chi2: empty contingency table (N = 0)");
  const double n = static_cast<double>(total);
  const double p_tc = static_cast<double>(counts.n_tc) / n;
  const double p_tnc = static_cast<double>(counts.n_tnc) / n;
  const double p_ntc = static_cast<double>(counts.n_ntc) / n;
  const double p_ntnc = static_cast<double>(counts.n_ntnc) / n;
  const double p_t = p_tc + p_tnc;
  const double p_nt = p_ntc + p_ntnc;
  const double p_c = p_tc + p_ntc;
  const double p_nc = p_tnc + p_ntnc;
  const double denom = p_t * p_nt * p_c * p_nc;
  if (denom == 0.0) return 0.0;
  const double cross = p_tc * p_ntnc - p_tnc * p_ntc;
  return n * cross * cross / denom;
}

ChiSquareTable::ChiSquareTable(std::vector<std::string> terms, std::vector<std::string> labels,
                               std::size_t n_docs, DenseMatrix scores)
    : terms_(std::move(terms)), labels_(std::move(labels)), n_docs_(n_docs), scores_(std::move(scores)) {
  if (scores_.cols != labels_.size()) throw InvalidArgument("ChiSquareTable: score columns != labels");
  if (!terms_.empty() && terms_.size() != scores_.rows) {
    throw InvalidArgument("ChiSquareTable: term names do not match score rows");
  }
}

std::vector<double> ChiSquareTable::label_scores(std::size_t label) const {
  std::vector<double> out(n_terms());
  for (std::size_t t = 0; t < n_terms(); ++t) out[t] = scores_(t, label);
  return out;
}

std::vector<double> ChiSquareTable::term_scores(std::size_t term) const {
  const auto r = scores_.row(term);
  return {r.begin(), r.end()};
}

std::vector<std::pair<std::string, double>> ChiSquareTable::top_terms(std::size_t label, std::size_t n) const {
  const auto f_c = label_scores(label);
  std::vector<std::pair<std::string, double>> out;
  for (const auto t : ranked(f_c, n)) {
    out.emplace_back(terms_.empty() ? "#" + std::to_string(t) : terms_[t], f_c[t]);
  }
  return out;
}

ChiSquareTable chi2_table(const SparseMatrix& presence, std::span<const std::size_t> y,
                          std::vector<std::string> labels, std::vector<std::string> terms) {
  if (labels.size() < 2) throw InvalidArgument("chi2_table: need at least two labels");
  if (y.size() != presence.rows()) throw InvalidArgument("chi2_table: label count does not match rows");
  const std::size_t m = labels.size();
  const std::size_t v = presence.cols();

  std::vector<std::size_t> label_count(m, 0);
  std::vector<std::size_t> term_label(v * m, 0);
  std::vector<std::size_t> term_count(v, 0);
  for (std::size_t d = 0; d < presence.rows(); ++d) {
    if (y[d] >= m) throw InvalidArgument("chi2_table: label index out of range");
    ++label_count[y[d]];
    for (const auto& e : presence.row(d)) {
      if (e.value == 0.0) continue;
      ++term_label[e.column * m + y[d]];
      ++term_count[e.column];
    }
  }

  const std::size_t n = presence.rows();
  DenseMatrix scores(v, m);
  for (std::size_t t = 0; t < v; ++t) {
    for (std::size_t c = 0; c < m; ++c) {
      ContingencyCounts cell;
      cell.n_tc = term_label[t * m + c];
      cell.n_tnc = term_count[t] - cell.n_tc;
      cell.n_ntc = label_count[c] - cell.n_tc;
      cell.n_ntnc = n - cell.n_tc - cell.n_tnc - cell.n_ntc;
      scores(t, c) = n > 0 ? chi2(cell) : 0.0;
    }
  }
  return ChiSquareTable(std::move(terms), std::move(labels), n, std::move(scores));
}

ChiSquareTable chi2_table(const SparseMatrix& presence, std::span<const std::string> y,
                          std::vector<std::string> terms) {
  const std::set<std::string> distinct(y.begin(), y.end());
  std::vector<std::string> labels(distinct.begin(), distinct.end());
  std::vector<std::size_t> idx(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    idx[i] = static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), y[i]) - labels.begin());
  }
  return chi2_table(presence, idx, std::move(labels), std::move(terms));
}

std::optional<double> nfis(std::span<const double> scores, std::size_t K) {
  if (K < 1) throw InvalidArgument("nfis: K must be >= 1");
  if (K > scores.size()) {
    throw InvalidArgument("nfis: K = " + std::to_string(K) + " exceeds the " + std::to_string(scores.size()) +
                          " available scores");
  }
  const auto top = ranked(scores, K);
  const double max_score = scores[top.front()];
  if (!(max_score > 0.0)) return std::nullopt;
  // Summing ratios (each <= 1) keeps 1 <= result <= K exact in floating point.
  double sum = 0.0;
  for (const auto t : top) sum += scores[t] / max_score;
  return sum;
}

std::optional<double> nfis(const ChiSquareTable& table, std::size_t label, std::size_t K) {
  if (label >= table.n_labels()) throw InvalidArgument("nfis: unknown label index");
  return nfis(table.label_scores(label), K);
}

NfisDistribution nfis_distribution(const ChiSquareTable& table, std::size_t K) {
  NfisDistribution dist;
  dist.K = K;
  dist.labels = table.labels();
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (std::size_t c = 0; c < table.n_labels(); ++c) {
    const auto score = nfis(table, c, K);
    dist.scores.push_back(score);
    if (!score) continue;
    lo = any ? std::min(lo, *score) : *score;
    hi = any ? std::max(hi, *score) : *score;
    any = true;
  }
  if (any) dist.imbalance = hi / lo;
  return dist;
}

}  // namespace subjaudit
