#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "subjaudit/classify.hpp"
#include "subjaudit/error.hpp"
#include "support.hpp"

using namespace subjaudit;
using Strings = std::vector<std::string>;

namespace {

SparseMatrix to_sparse(const DenseMatrix& X) {
  SparseMatrix m(X.cols);
  for (std::size_t r = 0; r < X.rows; ++r) {
    std::vector<SparseEntry> row;
    for (std::size_t c = 0; c < X.cols; ++c) row.push_back({static_cast<std::uint32_t>(c), X(r, c)});
    m.append_row(std::move(row));
  }
  return m;
}

struct Blobs {
  SparseMatrix X;
  Strings y;
};

Blobs separable_blobs(std::uint64_t seed = 3) {
  Strings y;
  const auto X = testing_support::two_blobs(50, 2, 3.0, seed, &y);
  return {to_sparse(X), y};
}

double accuracy(const Strings& a, const Strings& b) {
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
  return static_cast<double>(same) / static_cast<double>(a.size());
}

double weight_norm(const LinearModel& m) {
  double s = 0.0;
  for (double w : m.weights().data) s += w * w;
  for (double b : m.biases()) s += b * b;
  return std::sqrt(s);
}

}  // namespace

TEST(TrainSvm, SeparableBlobsReachFullTrainingAccuracy) {
  const auto [X, y] = separable_blobs();
  const auto model = train_svm(X, y, SvmOptions{});
  EXPECT_EQ(accuracy(predict(model, X), y), 1.0);
}

TEST(TrainSvm, SameSeedGivesBitwiseIdenticalWeights) {
  const auto [X, y] = separable_blobs();
  SvmOptions opt;
  opt.seed = 77;
  EXPECT_EQ(train_svm(X, y, opt), train_svm(X, y, opt));
  opt.parallel = false;
  auto serial = train_svm(X, y, opt);
  opt.parallel = true;
  EXPECT_EQ(serial, train_svm(X, y, opt));
}

TEST(TrainSvm, VanishingCShrinksWeightsToZero) {
  const auto [X, y] = separable_blobs();
  double previous = std::numeric_limits<double>::infinity();
  for (double C : {1.0, 1e-2, 1e-4, 1e-6}) {
    SvmOptions opt;
    opt.C = C;
    const double norm = weight_norm(train_svm(X, y, opt));
    EXPECT_LT(norm, previous);
    previous = norm;
  }
  EXPECT_LT(previous, 1e-3);
}

TEST(TrainSvm, RejectsSingleLabel) {
  const auto [X, y] = separable_blobs();
  const Strings one(y.size(), "a");
  EXPECT_THROW(train_svm(X, one, SvmOptions{}), InvalidArgument);
}

TEST(TrainBinarySvm, DualTraceNonIncreasingAndDualityGapSmall) {
  const auto [X, y] = separable_blobs(11);
  std::vector<int> sign;
  for (const auto& l : y) sign.push_back(l == "a" ? 1 : -1);
  SvmOptions opt;
  opt.C = 0.5;
  opt.tolerance = 1e-6;
  const auto svm = train_binary_svm(X, sign, opt);
  ASSERT_FALSE(svm.dual_trace.empty());
  for (std::size_t i = 1; i < svm.dual_trace.size(); ++i) {
    EXPECT_LE(svm.dual_trace[i], svm.dual_trace[i - 1] + 1e-12 * std::abs(svm.dual_trace[i - 1]));
  }
  // Weak duality: primal >= -dual_min, with equality at the optimum.
  EXPECT_GE(svm.primal_objective + svm.dual_trace.back(), -1e-9);
  EXPECT_LT(svm.primal_objective + svm.dual_trace.back(), 1e-3 * std::max(1.0, svm.primal_objective));
  EXPECT_TRUE(svm.converged);
}

TEST(TrainBinarySvm, ObjectiveMatchesWeights) {
  const auto [X, y] = separable_blobs(5);
  std::vector<int> sign;
  for (const auto& l : y) sign.push_back(l == "b" ? 1 : -1);
  const auto svm = train_binary_svm(X, sign, SvmOptions{});
  double obj = 0.5 * svm.bias * svm.bias;
  for (double w : svm.weights) obj += 0.5 * w * w;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    double s = svm.bias;
    for (const auto& e : X.row(i)) s += svm.weights[e.column] * e.value;
    obj += 5.0 * std::max(0.0, 1.0 - sign[i] * s);
  }
  EXPECT_NEAR(svm.primal_objective, obj, 1e-9 * std::max(1.0, obj));
}

TEST(LinearModel, SaveLoadRoundTrip) {
  const auto [X, y] = separable_blobs();
  const auto model = train_svm(X, y, SvmOptions{});
  std::stringstream buf;
  model.save(buf);
  const auto back = LinearModel::load(buf);
  EXPECT_EQ(back.labels(), model.labels());
  EXPECT_EQ(back.weights(), model.weights());
  EXPECT_EQ(back.biases(), model.biases());
  EXPECT_EQ(predict(back, X), predict(model, X));
}

TEST(Predict, ArgmaxWithEarlierLabelOnTies) {
  DenseMatrix W(3, 2);
  W(0, 0) = -1.0;
  W(1, 0) = 2.0;
  W(2, 0) = -3.0;
  const LinearModel model({"a", "b", "c"}, W, {0.0, 0.0, 0.0}, 1.0, 0, {0, 0, 0});
  SparseMatrix X(2);
  X.append_row({{0, 1.0}});
  X.append_row({});
  EXPECT_EQ(predict(model, X), (Strings{"b", "a"}));

  DenseMatrix tie(2, 1);
  tie(0, 0) = 1.0;
  tie(1, 0) = 1.0;
  const LinearModel tied({"x", "y"}, tie, {0.5, 0.5}, 1.0, 0, {0, 0});
  SparseMatrix one(1);
  one.append_row({{0, 2.0}});
  EXPECT_EQ(predict(tied, one), Strings{"x"});
}

TEST(ConfusionMatrix, EnumeratedCounts) {
  const Strings t{"a", "a", "b"}, p{"a", "b", "b"};
  const auto cm = confusion_matrix(t, p, {"a", "b"});
  EXPECT_EQ(cm.count(0, 0), 1u);
  EXPECT_EQ(cm.count(0, 1), 1u);
  EXPECT_EQ(cm.count(1, 0), 0u);
  EXPECT_EQ(cm.count(1, 1), 1u);
  EXPECT_EQ(cm.total(), 3u);
}

TEST(ConfusionMatrix, IdentityWhenPredictionsPerfect) {
  const Strings t{"a", "c", "b", "c", "a"};
  const auto cm = confusion_matrix(t, t, {"a", "b", "c"});
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      if (i != j) EXPECT_EQ(cm.count(i, j), 0u);
    }
  }
  EXPECT_EQ(cm.count(2, 2), 2u);
}

TEST(ConfusionMatrix, RowNormalizedRowsSumToOne) {
  subjaudit::Rng rng(4);
  const Strings labels{"a", "b", "c", "d"};
  Strings t, p;
  for (int i = 0; i < 200; ++i) {
    t.push_back(labels[rng.below(3)]);  // "d" never true: a zero row
    p.push_back(labels[rng.below(4)]);
  }
  const auto norm = confusion_matrix(t, p, labels).row_normalized();
  for (std::size_t i = 0; i < 4; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < 4; ++j) s += norm(i, j);
    EXPECT_NEAR(s, i < 3 ? 1.0 : 0.0, 1e-12);
  }
}

TEST(ConfusionMatrix, RejectsUnknownLabelsAndLengthMismatch) {
  const Strings t{"a", "z"}, p{"a", "a"}, shorter{"a"};
  EXPECT_THROW(confusion_matrix(t, p, {"a", "b"}), InvalidArgument);
  EXPECT_THROW(confusion_matrix(p, shorter, {"a"}), InvalidArgument);
}

TEST(F1, PublishedRowAndMacro) {
  EXPECT_NEAR(f1_score(0.75, 0.89), 0.81, 0.005);
  const double f1s[] = {0.81, 0.49, 0.50, 0.36};
  EXPECT_NEAR(macro_f1(f1s), 0.54, 0.005);
}

TEST(F1, FixedPointAndZeroCase) {
  for (double p : {0.1, 0.37, 1.0}) EXPECT_DOUBLE_EQ(f1_score(p, p), p);
  EXPECT_EQ(f1_score(0.0, 0.0), 0.0);
}

TEST(F1, MetricsFromConfusionMatchHandCount) {
  // true a a a b b, pred a a b b a
  const Strings t{"a", "a", "a", "b", "b"}, p{"a", "a", "b", "b", "a"};
  const auto m = f1_metrics(confusion_matrix(t, p, {"a", "b"}));
  EXPECT_DOUBLE_EQ(m.per_label[0].precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.per_label[0].recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.per_label[1].precision, 0.5);
  EXPECT_DOUBLE_EQ(m.per_label[1].recall, 0.5);
  EXPECT_EQ(m.per_label[0].support, 3u);
  EXPECT_DOUBLE_EQ(m.macro_f1, (2.0 / 3.0 + 0.5) / 2.0);
}

TEST(F1, NeverPredictedLabelScoresZero) {
  const Strings t{"a", "b"}, p{"a", "a"};
  const auto m = f1_metrics(confusion_matrix(t, p, {"a", "b"}));
  EXPECT_EQ(m.per_label[1].precision, 0.0);
  EXPECT_EQ(m.per_label[1].f1, 0.0);
}

TEST(StratifiedFolds, PartitionAndBalance) {
  Strings y;
  for (int i = 0; i < 53; ++i) y.push_back(i % 4 == 0 ? "rare" : "common");
  const auto folds = stratified_folds(y, 5, 2);
  ASSERT_EQ(folds.size(), y.size());
  for (const auto& label : {"rare", "common"}) {
    std::vector<std::size_t> per(5, 0);
    std::size_t total = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == label) {
        ASSERT_LT(folds[i], 5u);
        per[folds[i]]++;
        total++;
      }
    }
    for (auto c : per) {
      EXPECT_GE(c, total / 5);
      EXPECT_LE(c, (total + 4) / 5);
    }
  }
}

TEST(CrossValidate, SingletonGridPicksIt) {
  const auto [X, y] = separable_blobs();
  const auto cv = cross_validate(X, y, 5, {5.0}, 1);
  EXPECT_EQ(cv.best_C, 5.0);
  ASSERT_EQ(cv.mean_macro_f1.size(), 1u);
}

TEST(CrossValidate, EveryIndexInExactlyOneValidationFold) {
  const auto [X, y] = separable_blobs();
  const auto cv = cross_validate(X, y, 4, {1.0}, 8);
  ASSERT_EQ(cv.fold_of.size(), y.size());
  std::vector<std::size_t> sizes(4, 0);
  for (auto f : cv.fold_of) {
    ASSERT_LT(f, 4u);
    sizes[f]++;
  }
  for (auto s : sizes) EXPECT_EQ(s, 25u);
}

TEST(CrossValidate, TinyCUnderfitsSoLargerCWins) {
  // Separable but imbalanced (60/20) with small features: at C=1e-4 every
  // dual variable sits at its bound, the bias term dominates and every
  // point goes to the majority label. Each candidate is also run alone as
  // the oracle for the comparison.
  subjaudit::Rng rng(6);
  DenseMatrix X(80, 2);
  Strings y;
  for (std::size_t i = 0; i < 80; ++i) {
    const double center = i < 60 ? -0.3 : 0.3;
    for (std::size_t d = 0; d < 2; ++d) X(i, d) = center + 0.05 * rng.normal();
    y.push_back(i < 60 ? "major" : "minor");
  }
  const auto S = to_sparse(X);
  const auto a = cross_validate(S, y, 4, {1e-4}, 3);
  const auto b = cross_validate(S, y, 4, {5.0}, 3);
  EXPECT_GT(b.mean_macro_f1[0].second, a.mean_macro_f1[0].second);
  const auto both = cross_validate(S, y, 4, {1e-4, 5.0}, 3);
  EXPECT_EQ(both.best_C, 5.0);
  EXPECT_DOUBLE_EQ(both.mean_macro_f1[0].second, a.mean_macro_f1[0].second);
  EXPECT_DOUBLE_EQ(both.mean_macro_f1[1].second, b.mean_macro_f1[0].second);
}

TEST(CrossValidate, RejectsTooFewMembersPerFold) {
  const auto [X, y] = separable_blobs();
  EXPECT_THROW(cross_validate(X, y, 1, {1.0}, 1), InvalidArgument);
  EXPECT_THROW(cross_validate(X, y, 51, {1.0}, 1), InvalidArgument);
}
