#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "subjaudit/error.hpp"
#include "subjaudit/indicative.hpp"
#include "subjaudit/rng.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace subjaudit;

namespace {

SparseMatrix presence_matrix(const std::vector<std::vector<std::uint32_t>>& rows, std::size_t n_terms) {
  SparseMatrix m(n_terms);
  for (const auto& r : rows) {
    std::vector<SparseEntry> e;
    for (auto c : r) e.push_back({c, 1.0});
    m.append_row(std::move(e));
  }
  return m;
}

}  // namespace

TEST(Contingency, EnumeratedFourDocuments) {
  // term 0 in docs 1,2 (zero-based 0,1); label 0 on docs 1,3 (0,2)
  const auto P = presence_matrix({{0}, {0}, {}, {}}, 1);
  const std::vector<std::size_t> y{0, 1, 0, 1};
  const auto c = contingency(P, y, 0, 0);
  EXPECT_EQ(c, (ContingencyCounts{1, 1, 1, 1}));
  EXPECT_EQ(c.total(), 4u);
}

TEST(Contingency, AbsentTermAndPartition) {
  subjaudit::Rng rng(2);
  std::vector<std::vector<std::uint32_t>> rows;
  std::vector<std::size_t> y;
  for (int d = 0; d < 40; ++d) {
    std::vector<std::uint32_t> r;
    for (std::uint32_t t = 0; t < 6; ++t) {
      if (t < 5 && rng.uniform() < 0.4) r.push_back(t);
    }
    rows.push_back(r);
    y.push_back(rng.below(3));
  }
  const auto P = presence_matrix(rows, 6);
  const auto none = contingency(P, y, 5, 1);
  EXPECT_EQ(none.n_tc, 0u);
  EXPECT_EQ(none.n_tnc, 0u);
  for (std::size_t t = 0; t < 6; ++t) {
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(contingency(P, y, t, c).total(), 40u);
  }
}

TEST(Chi2, IndependentTermScoresZero) {
  // p(t) = 0.4, p(c) = 0.25, cells are products times N = 100
  EXPECT_NEAR(chi2({10, 30, 15, 45}), 0.0, 1e-12);
}

TEST(Chi2, PerfectAssociationEqualsN) {
  for (const auto& [a, d] : std::vector<std::pair<std::size_t, std::size_t>>{{1, 1}, {7, 93}, {300, 20}}) {
    EXPECT_NEAR(chi2({a, 0, 0, d}), static_cast<double>(a + d), 1e-9);
  }
}

TEST(Chi2, MatchesPearsonOracle) {
  EXPECT_NEAR(chi2({30, 10, 20, 40}), oracle::pearson_chi2(30, 10, 20, 40), 1e-10);
  EXPECT_NEAR(chi2({30, 10, 20, 40}), 100.0 * (30.0 * 40 - 10.0 * 20) * (30.0 * 40 - 10.0 * 20) / (40.0 * 60 * 50 * 50),
              1e-10);
}

TEST(Chi2, ZeroMarginIsZeroAndEmptyThrows) {
  EXPECT_EQ(chi2({5, 7, 0, 0}), 0.0);
  EXPECT_EQ(chi2({0, 3, 0, 9}), 0.0);
  EXPECT_THROW(chi2({0, 0, 0, 0}), InvalidArgument);
}

TEST(Chi2Table, ShapeNonNegativeAndPairwiseOracle) {
  subjaudit::Rng rng(8);
  std::vector<std::vector<std::uint32_t>> rows;
  std::vector<std::size_t> y;
  const std::size_t n_terms = 30;
  for (int d = 0; d < 120; ++d) {
    std::vector<std::uint32_t> r;
    const std::size_t label = rng.below(4);
    for (std::uint32_t t = 0; t < n_terms; ++t) {
      const double p = t % 4 == label ? 0.6 : 0.2;
      if (rng.uniform() < p) r.push_back(t);
    }
    rows.push_back(r);
    y.push_back(label);
  }
  const auto P = presence_matrix(rows, n_terms);
  const auto table = chi2_table(P, y, {"a", "b", "c", "d"});
  ASSERT_EQ(table.n_terms(), n_terms);
  ASSERT_EQ(table.n_labels(), 4u);
  for (double s : table.scores().data) EXPECT_GE(s, 0.0);
  for (int k = 0; k < 20; ++k) {
    const std::size_t t = rng.below(n_terms), c = rng.below(4);
    const auto cc = contingency(P, y, t, c);
    EXPECT_NEAR(table.score(t, c),
                oracle::pearson_chi2(double(cc.n_tc), double(cc.n_tnc), double(cc.n_ntc), double(cc.n_ntnc)),
                1e-10 * std::max(1.0, table.score(t, c)));
  }
}

TEST(Chi2Table, TwoLabelsThreeTermsAndUbiquitousTerm) {
  const auto P = presence_matrix({{0, 1}, {0, 2}, {0}, {0, 1, 2}}, 3);
  const std::vector<std::string> y{"x", "y", "x", "y"};
  const auto table = chi2_table(P, y, {"everywhere", "t1", "t2"});
  EXPECT_EQ(table.n_terms(), 3u);
  EXPECT_EQ(table.n_labels(), 2u);
  EXPECT_EQ(table.score(0, 0), 0.0);
  EXPECT_EQ(table.score(0, 1), 0.0);
  EXPECT_EQ(table.labels(), (std::vector<std::string>{"x", "y"}));
}

TEST(Chi2Table, RejectsSingleLabel) {
  const auto P = presence_matrix({{0}, {}}, 1);
  const std::vector<std::string> y{"x", "x"};
  EXPECT_THROW(chi2_table(P, y), InvalidArgument);
}

TEST(Chi2Table, TopTermsOrderedWithIndexTieBreak) {
  DenseMatrix s(4, 1);
  s(0, 0) = 1.0;
  s(1, 0) = 3.0;
  s(2, 0) = 3.0;
  s(3, 0) = 2.0;
  const ChiSquareTable table({"a", "b", "c", "d"}, {"only"}, 10, s);
  const auto top = table.top_terms(0, 3);
  ASSERT_EQ(top.size(), 3u);
  EXPECT_EQ(top[0].first, "b");
  EXPECT_EQ(top[1].first, "c");
  EXPECT_EQ(top[2].first, "d");
}

TEST(Nfis, HandEvaluatedAndBounds) {
  const std::vector<double> f{10, 5, 5, 1};
  EXPECT_DOUBLE_EQ(*nfis(f, 3), 2.0);
  EXPECT_DOUBLE_EQ(*nfis(f, 1), 1.0);
  const std::vector<double> flat{4, 4, 4, 1};
  EXPECT_DOUBLE_EQ(*nfis(flat, 3), 3.0);
}

TEST(Nfis, AllZeroIsUndefinedAndBadKThrows) {
  const std::vector<double> zero{0, 0, 0};
  EXPECT_FALSE(nfis(zero, 2).has_value());
  const std::vector<double> f{1, 2};
  EXPECT_THROW(nfis(f, 0), InvalidArgument);
  EXPECT_THROW(nfis(f, 3), InvalidArgument);
}

TEST(NfisDistribution, IdenticalColumnsGiveUnitImbalance) {
  DenseMatrix s(5, 2);
  for (std::size_t t = 0; t < 5; ++t) s(t, 0) = s(t, 1) = static_cast<double>(t * t + 1);
  const ChiSquareTable table({}, {"a", "b"}, 10, s);
  const auto d = nfis_distribution(table, 3);
  EXPECT_DOUBLE_EQ(*d.imbalance, 1.0);
  const auto k1 = nfis_distribution(table, 1);
  for (const auto& v : k1.scores) EXPECT_DOUBLE_EQ(*v, 1.0);
  EXPECT_DOUBLE_EQ(*k1.imbalance, 1.0);
}

TEST(NfisDistribution, ImbalanceIsMaxOverMinIgnoringUndefined) {
  DenseMatrix s(3, 3);
  s(0, 0) = 4; s(1, 0) = 4; s(2, 0) = 4;   // nfis(K=3) = 3
  s(0, 1) = 9; s(1, 1) = 0; s(2, 1) = 0;   // nfis = 1
  // label 2 all zero: undefined
  const ChiSquareTable table({}, {"a", "b", "c"}, 10, s);
  const auto d = nfis_distribution(table, 3);
  EXPECT_FALSE(d.scores[2].has_value());
  EXPECT_DOUBLE_EQ(*d.imbalance, 3.0);
}
