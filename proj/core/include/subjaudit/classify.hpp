#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "subjaudit/dense.hpp"
#include "subjaudit/vectorize.hpp"

namespace subjaudit {

struct SvmOptions {
  /// Hinge-loss penalty.
  double C = 5.0;
  /// Upper bound on passes over the data.
  int max_epochs = 1000;
  /// Stop once the projected-gradient gap (max - min over active
  /// coordinates) drops below this value.
  double tolerance = 1e-4;
  std::uint64_t seed = 0;
  /// Value of the constant feature appended to every row; its weight is the
  /// bias. 0 disables the bias term.
  double bias_feature = 1.0;
  /// Train one-vs-rest problems on separate threads.
  bool parallel = true;
};

/// Result of one binary L2-regularized hinge-loss problem.
struct BinarySvm {
  std::vector<double> weights;
  double bias = 0.0;
  /// 0.5 * |w|^2 + C * sum(max(0, 1 - y * score))
  double primal_objective = 0.0;
  /// Dual objective 0.5 * |w|^2 - sum(alpha), recorded after every epoch.
  /// Non-increasing up to rounding.
  std::vector<double> dual_trace;
  int epochs = 0;
  bool converged = false;
};

/// Dual coordinate descent for min_w 0.5|w|^2 + C sum max(0, 1 - y_i w.x_i)
/// with a seeded random permutation per epoch and liblinear-style shrinking.
/// `y` holds +1/-1.
BinarySvm train_binary_svm(const SparseMatrix& X, std::span<const int> y, const SvmOptions& options);

/// One-vs-rest linear SVM.
class LinearModel {
 public:
  LinearModel() = default;
  LinearModel(std::vector<std::string> labels, DenseMatrix weights, std::vector<double> biases,
              double C, std::uint64_t seed, std::vector<double> objectives);

  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t dim() const { return weights_.cols; }
  const DenseMatrix& weights() const { return weights_; }
  const std::vector<double>& biases() const { return biases_; }
  double C() const { return C_; }
  std::uint64_t seed() const { return seed_; }
  /// Final primal objective per label.
  const std::vector<double>& objectives() const { return objectives_; }

  /// w_label . x + b_label for every label.
  std::vector<double> scores(std::span<const SparseEntry> row) const;

  /// Text format: header `subjaudit-linear-model 1 <n_labels> <dim> <C> <seed>`,
  /// then per label one line `<label>` and one line `<bias> <w_0> ... <w_{dim-1}>`.
  void save(std::ostream& out) const;
  static LinearModel load(std::istream& in);

  bool operator==(const LinearModel&) const = default;

 private:
  std::vector<std::string> labels_;
  DenseMatrix weights_;
  std::vector<double> biases_;
  double C_ = 0.0;
  std::uint64_t seed_ = 0;
  std::vector<double> objectives_;
};

/// `labels` fixes the label order; when empty the sorted distinct values of
/// `y` are used. Throws InvalidArgument with fewer than two labels.
LinearModel train_svm(const SparseMatrix& X, std::span<const std::string> y, const SvmOptions& options,
                      std::vector<std::string> labels = {});

/// Argmax of the per-label scores; ties go to the earlier label.
std::vector<std::string> predict(const LinearModel& model, const SparseMatrix& X);

class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::vector<std::string> labels);

  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  /// Rows are true labels, columns predicted labels.
  std::size_t count(std::size_t true_idx, std::size_t pred_idx) const {
    return counts_[true_idx * labels_.size() + pred_idx];
  }
  void add(std::size_t true_idx, std::size_t pred_idx, std::size_t n = 1) {
    counts_[true_idx * labels_.size() + pred_idx] += n;
  }
  std::size_t total() const;
  std::size_t row_total(std::size_t true_idx) const;
  std::size_t column_total(std::size_t pred_idx) const;

  /// Each nonzero row divided by its sum; zero rows stay zero.
  DenseMatrix row_normalized() const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::vector<std::string> labels_;
  std::vector<std::size_t> counts_;
};

/// Throws InvalidArgument on length mismatch or labels not in `labels`.
ConfusionMatrix confusion_matrix(std::span<const std::string> y_true, std::span<const std::string> y_pred,
                                 const std::vector<std::string>& labels);

struct LabelMetrics {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct ClassMetrics {
  std::vector<LabelMetrics> per_label;
  double macro_f1 = 0.0;
};

/// Harmonic mean of precision and recall; 0 when both are 0.
double f1_score(double precision, double recall);

/// Unweighted mean of per-label F1 values.
double macro_f1(std::span<const double> f1_values);

/// Precision, recall and F1 per label (0/0 -> 0) plus their macro average.
ClassMetrics f1_metrics(const ConfusionMatrix& cm);

struct PrecisionRecall {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
};

/// Same computation from given precision/recall pairs.
ClassMetrics f1_metrics(std::span<const PrecisionRecall> pairs);

/// Fold index in [0, k) per sample. Each label's members are shuffled with
/// the seed and dealt round-robin, so every fold holds floor or ceil of
/// count/k members of each label.
std::vector<std::size_t> stratified_folds(std::span<const std::string> y, std::size_t k, std::uint64_t seed);

struct CrossValidationResult {
  double best_C = 0.0;
  /// (C, mean macro-F1 over folds), in ascending C.
  std::vector<std::pair<double, double>> mean_macro_f1;
  std::vector<std::size_t> fold_of;
};

/// Stratified k-fold selection of C by mean macro-F1; ties go to the smaller
/// C. Throws InvalidArgument when k < 2 or a label has fewer than k members.
CrossValidationResult cross_validate(const SparseMatrix& X, std::span<const std::string> y, std::size_t k,
                                     std::vector<double> candidate_Cs, std::uint64_t seed,
                                     const SvmOptions& base = {});

}  // namespace subjaudit
