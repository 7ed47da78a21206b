#include "subjaudit/classify.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "subjaudit/error.hpp"
#include "subjaudit/rng.hpp"

namespace subjaudit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dot(std::span<const SparseEntry> row, const std::vector<double>& w) {
  double s = 0.0;
  for (const auto& e : row) s += w[e.column] * e.value;
  return s;
}

std::size_t index_of(const std::vector<std::string>& labels, const std::string& label) {
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw InvalidArgument("unknown label '" + label + "'");
  return static_cast<std::size_t>(it - labels.begin());
}

}  // namespace

BinarySvm train_binary_svm(const SparseMatrix& X, std::span<const int> y, const SvmOptions& options) {
  const std::size_t l = X.rows();
  if (y.size() != l) throw InvalidArgument("train_binary_svm: label count does not match rows");
  if (!(options.C > 0.0)) throw InvalidArgument("train_binary_svm: C must be positive");

  const double C = options.C;
  const double bias_feature = options.bias_feature;
  std::vector<double> w(X.cols(), 0.0);
  double w_bias = 0.0;
  std::vector<double> alpha(l, 0.0);
  std::vector<double> qd(l, 0.0);
  std::vector<std::size_t> index(l);

  for (std::size_t i = 0; i < l; ++i) {
    if (y[i] != 1 && y[i] != -1) throw InvalidArgument("train_binary_svm: labels must be +1 or -1");
    double q = bias_feature * bias_feature;
    for (const auto& e : X.row(i)) {
      if (!std::isfinite(e.value)) throw InvalidArgument("train_binary_svm: non-finite feature value");
      q += e.value * e.value;
    }
    qd[i] = q;
    index[i] = i;
  }

  const auto dual_objective = [&] {
    double v = w_bias * w_bias;
    for (const double x : w) v += x * x;
    v *= 0.5;
    for (const double a : alpha) v -= a;
    return v;
  };

  BinarySvm result;
  Rng rng(options.seed);
  std::size_t active_size = l;
  double pg_max_old = kInf;
  double pg_min_old = -kInf;
  int epoch = 0;

  while (epoch < options.max_epochs) {
    double pg_max_new = -kInf;
    double pg_min_new = kInf;
    rng.shuffle(std::span<std::size_t>(index.data(), active_size));

    for (std::size_t s = 0; s < active_size; ++s) {
      const std::size_t i = index[s];
      if (qd[i] <= 0.0) continue;  // empty row with no bias feature
      const double yi = y[i];
      const auto row = X.row(i);
      const double G = yi * (dot(row, w) + w_bias * bias_feature) - 1.0;

      double pg = 0.0;
      if (alpha[i] == 0.0) {
        if (G > pg_max_old) {
          --active_size;
          std::swap(index[s], index[active_size]);
          --s;
          continue;
        }
        if (G < 0.0) pg = G;
      } else if (alpha[i] == C) {
        if (G < pg_min_old) {
          --active_size;
          std::swap(index[s], index[active_size]);
          --s;
          continue;
        }
        if (G > 0.0) pg = G;
      } else {
        pg = G;
      }
      pg_max_new = std::max(pg_max_new, pg);
      pg_min_new = std::min(pg_min_new, pg);

      if (std::fabs(pg) > 1e-12) {
        const double old = alpha[i];
        alpha[i] = std::min(std::max(old - G / qd[i], 0.0), C);
        const double d = (alpha[i] - old) * yi;
        for (const auto& e : row) w[e.column] += d * e.value;
        w_bias += d * bias_feature;
      }
    }

    ++epoch;
    result.dual_trace.push_back(dual_objective());

    if (pg_max_new - pg_min_new <= options.tolerance) {
      if (active_size == l) {
        result.converged = true;
        break;
      }
      // Re-check optimality on the full set before stopping.
      active_size = l;
      pg_max_old = kInf;
      pg_min_old = -kInf;
      continue;
    }
    pg_max_old = pg_max_new > 0.0 ? pg_max_new : kInf;
    pg_min_old = pg_min_new < 0.0 ? pg_min_new : -kInf;
  }

  double primal = w_bias * w_bias;
  for (const double x : w) primal += x * x;
  primal *= 0.5;
  for (std::size_t i = 0; i < l; ++i) {
    const double margin = y[i] * (dot(X.row(i), w) + w_bias * bias_feature);
    primal += C * std::max(0.0, 1.0 - margin);
  }

  result.weights = std::move(w);
  result.bias = w_bias * bias_feature;
  result.primal_objective = primal;
  result.epochs = epoch;
  return result;
}

LinearModel::LinearModel(std::vector<std::string> labels, DenseMatrix weights, std::vector<double> biases,
                         double C, std::uint64_t seed, std::vector<double> objectives)
    : labels_(std::move(labels)), weights_(std::move(weights)), biases_(std::move(biases)), C_(C),
      seed_(seed), objectives_(std::move(objectives)) {
  if (weights_.rows != labels_.size() || biases_.size() != labels_.size()) {
    throw InvalidArgument("LinearModel: one weight vector and bias per label required");
  }
}

std::vector<double> LinearModel::scores(std::span<const SparseEntry> row) const {
  std::vector<double> out(labels_.size());
  for (std::size_t k = 0; k < labels_.size(); ++k) {
    const auto w = weights_.row(k);
    double s = biases_[k];
    for (const auto& e : row) {
      if (e.column >= w.size()) throw InvalidArgument("LinearModel: feature dimension mismatch");
      s += w[e.column] * e.value;
    }
    out[k] = s;
  }
  return out;
}

void LinearModel::save(std::ostream& out) const {
  const auto old_precision = out.precision(17);
  out << "subjaudit-linear-model 1 " << labels_.size() << ' ' << dim() << ' ' << C_ << ' ' << seed_ << '\n';
  for (std::size_t k = 0; k < labels_.size(); ++k) {
    out << labels_[k] << '\n' << biases_[k];
    for (const double x : weights_.row(k)) out << ' ' << x;
    out << '\n';
  }
  out.precision(old_precision);
  if (!out) throw IoError("failed writing linear model");
}

LinearModel LinearModel::load(std::istream& in) {
  std::string magic;
  int version = 0;
  std::size_t n_labels = 0, dim = 0;
  double C = 0.0;
  std::uint64_t seed = 0;
  if (!(in >> magic >> version >> n_labels >> dim >> C >> seed) || magic != "subjaudit-linear-model" ||
      version != 1) {
    throw IoError("not a subjaudit linear model file");
  }
  in.ignore(1);
  std::vector<std::string> labels(n_labels);
  DenseMatrix weights(n_labels, dim);
  std::vector<double> biases(n_labels);
  for (std::size_t k = 0; k < n_labels; ++k) {
    std::string values;
    if (!std::getline(in, labels[k]) || !std::getline(in, values)) throw IoError("truncated linear model file");
    std::istringstream vs(values);
    vs >> biases[k];
    for (auto& x : weights.row(k)) vs >> x;
    if (!vs) throw IoError("malformed weights for label '" + labels[k] + "'");
  }
  return LinearModel(std::move(labels), std::move(weights), std::move(biases), C, seed,
                     std::vector<double>(n_labels, 0.0));
}

LinearModel train_svm(const SparseMatrix& X, std::span<const std::string> y, const SvmOptions& options,
                      std::vector<std::string> labels) {
  if (X.rows() != y.size()) throw InvalidArgument("train_svm: label count does not match rows");
  if (!(options.C > 0.0)) throw InvalidArgument("train_svm: C must be positive");
  if (labels.empty()) {
    std::set<std::string> distinct(y.begin(), y.end());
    labels.assign(distinct.begin(), distinct.end());
  }
  if (labels.size() < 2) throw InvalidArgument("train_svm: need at least two distinct labels");

  std::vector<std::size_t> y_idx(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) y_idx[i] = index_of(labels, y[i]);

  const auto solve = [&](std::size_t k) {
    std::vector<int> binary(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) binary[i] = y_idx[i] == k ? 1 : -1;
    SvmOptions opts = options;
    opts.seed = mix_seed(options.seed, k);
    return train_binary_svm(X, binary, opts);
  };

  std::vector<BinarySvm> solved;
  solved.reserve(labels.size());
  if (options.parallel && labels.size() > 1) {
    std::vector<std::future<BinarySvm>> jobs;
    for (std::size_t k = 0; k < labels.size(); ++k) jobs.push_back(std::async(std::launch::async, solve, k));
    for (auto& job : jobs) solved.push_back(job.get());
  } else {
    for (std::size_t k = 0; k < labels.size(); ++k) solved.push_back(solve(k));
  }

  DenseMatrix weights(labels.size(), X.cols());
  std::vector<double> biases(labels.size());
  std::vector<double> objectives(labels.size());
  for (std::size_t k = 0; k < labels.size(); ++k) {
    std::copy(solved[k].weights.begin(), solved[k].weights.end(), weights.row(k).begin());
    biases[k] = solved[k].bias;
    objectives[k] = solved[k].primal_objective;
  }
  return LinearModel(std::move(labels), std::move(weights), std::move(biases), options.C, options.seed,
                     std::move(objectives));
}

std::vector<std::string> predict(const LinearModel& model, const SparseMatrix& X) {
  if (X.cols() != model.dim()) throw InvalidArgument("predict: feature dimension mismatch");
  std::vector<std::string> out;
  out.reserve(X.rows());
  for (std::size_t r = 0; r < X.rows(); ++r) {
    const auto s = model.scores(X.row(r));
    std::size_t best = 0;
    for (std::size_t k = 1; k < s.size(); ++k) {
      if (s[k] > s[best]) best = k;
    }
    out.push_back(model.labels()[best]);
  }
  return out;
}

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> labels)
    : labels_(std::move(labels)), counts_(labels_.size() * labels_.size(), 0) {}

std::size_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0});
}

std::size_t ConfusionMatrix::row_total(std::size_t true_idx) const {
  std::size_t s = 0;
  for (std::size_t j = 0; j < size(); ++j) s += count(true_idx, j);
  return s;
}

std::size_t ConfusionMatrix::column_total(std::size_t pred_idx) const {
  std::size_t s = 0;
  for (std::size_t i = 0; i < size(); ++i) s += count(i, pred_idx);
  return s;
}

DenseMatrix ConfusionMatrix::row_normalized() const {
  DenseMatrix out(size(), size());
  for (std::size_t i = 0; i < size(); ++i) {
    const auto rt = row_total(i);
    if (rt == 0) continue;
    for (std::size_t j = 0; j < size(); ++j) {
      out(i, j) = static_cast<double>(count(i, j)) / static_cast<double>(rt);
    }
  }
  return out;
}

ConfusionMatrix confusion_matrix(std::span<const std::string> y_true, std::span<const std::string> y_pred,
                                 const std::vector<std::string>& labels) {
  if (y_true.size() != y_pred.size()) throw InvalidArgument("confusion_matrix: length mismatch");
  std::map<std::string_view, std::size_t> pos;
  for (std::size_t i = 0; i < labels.size(); ++i) pos.emplace(labels[i], i);
  const auto lookup = [&](const std::string& label) {
    const auto it = pos.find(label);
    if (it == pos.end()) throw InvalidArgument("confusion_matrix: unknown label '" + label + "'");
    return it->second;
  };
  ConfusionMatrix cm(labels);
  for (std::size_t k = 0; k < y_true.size(); ++k) cm.add(lookup(y_true[k]), lookup(y_pred[k]));
  return cm;
}

double f1_score(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

double macro_f1(std::span<const double> f1_values) {
  if (f1_values.empty()) return 0.0;
  return std::accumulate(f1_values.begin(), f1_values.end(), 0.0) / static_cast<double>(f1_values.size());
}

ClassMetrics f1_metrics(const ConfusionMatrix& cm) {
  ClassMetrics out;
  std::vector<double> f1s;
  for (std::size_t c = 0; c < cm.size(); ++c) {
    const auto tp = static_cast<double>(cm.count(c, c));
    const auto predicted = static_cast<double>(cm.column_total(c));
    const auto actual = static_cast<double>(cm.row_total(c));
    LabelMetrics m;
    m.label = cm.labels()[c];
    m.precision = predicted > 0.0 ? tp / predicted : 0.0;
    m.recall = actual > 0.0 ? tp / actual : 0.0;
    m.f1 = f1_score(m.precision, m.recall);
    m.support = cm.row_total(c);
    f1s.push_back(m.f1);
    out.per_label.push_back(std::move(m));
  }
  out.macro_f1 = macro_f1(f1s);
  return out;
}

ClassMetrics f1_metrics(std::span<const PrecisionRecall> pairs) {
  ClassMetrics out;
  std::vector<double> f1s;
  for (const auto& pr : pairs) {
    LabelMetrics m;
    m.label = pr.label;
    m.precision = pr.precision;
    m.recall = pr.recall;
    m.f1 = f1_score(pr.precision, pr.recall);
    f1s.push_back(m.f1);
    out.per_label.push_back(std::move(m));
  }
  out.macro_f1 = macro_f1(f1s);
  return out;
}

std::vector<std::size_t> stratified_folds(std::span<const std::string> y, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InvalidArgument("stratified_folds: k must be >= 2");
  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < y.size(); ++i) by_label[y[i]].push_back(i);

  std::vector<std::size_t> fold_of(y.size(), 0);
  std::size_t stream = 0;
  std::size_t offset = 0;
  for (auto& [label, members] : by_label) {
    if (members.size() < k) {
      throw InvalidArgument("stratified_folds: label '" + label + "' has fewer than " + std::to_string(k) +
                            " members");
    }
    Rng rng(mix_seed(seed, stream++));
    rng.shuffle(std::span<std::size_t>(members));
    // Rotating the starting fold per label keeps fold sizes balanced.
    for (std::size_t j = 0; j < members.size(); ++j) fold_of[members[j]] = (offset + j) % k;
    offset = (offset + members.size()) % k;
  }
  return fold_of;
}

CrossValidationResult cross_validate(const SparseMatrix& X, std::span<const std::string> y, std::size_t k,
                                     std::vector<double> candidate_Cs, std::uint64_t seed,
                                     const SvmOptions& base) {
  if (X.rows() != y.size()) throw InvalidArgument("cross_validate: label count does not match rows");
  if (candidate_Cs.empty()) throw InvalidArgument("cross_validate: no candidate C values");
  std::sort(candidate_Cs.begin(), candidate_Cs.end());
  candidate_Cs.erase(std::unique(candidate_Cs.begin(), candidate_Cs.end()), candidate_Cs.end());

  CrossValidationResult result;
  result.fold_of = stratified_folds(y, k, seed);
  std::set<std::string> distinct(y.begin(), y.end());
  const std::vector<std::string> labels(distinct.begin(), distinct.end());

  double best_score = -1.0;
  for (const double C : candidate_Cs) {
    double total = 0.0;
    for (std::size_t fold = 0; fold < k; ++fold) {
      std::vector<std::size_t> train_idx, valid_idx;
      for (std::size_t i = 0; i < y.size(); ++i) {
        (result.fold_of[i] == fold ? valid_idx : train_idx).push_back(i);
      }
      std::vector<std::string> y_train, y_valid;
      for (const auto i : train_idx) y_train.push_back(y[i]);
      for (const auto i : valid_idx) y_valid.push_back(y[i]);

      SvmOptions opts = base;
      opts.C = C;
      opts.seed = mix_seed(seed, 1000 + fold);
      const auto model = train_svm(X.select_rows(train_idx), y_train, opts, labels);
      const auto pred = predict(model, X.select_rows(valid_idx));
      total += f1_metrics(confusion_matrix(y_valid, pred, labels)).macro_f1;
    }
    const double mean = total / static_cast<double>(k);
    result.mean_macro_f1.emplace_back(C, mean);
    if (mean > best_score) {
      best_score = mean;
      result.best_C = C;
    }
  }
  return result;
}

}  // namespace subjaudit
