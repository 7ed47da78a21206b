#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "subjaudit/config.hpp"
#include "subjaudit/error.hpp"
#include "subjaudit/report.hpp"
#include "subjaudit/svg.hpp"
#include "support.hpp"

using namespace subjaudit;
using testing_support::read_text;
using testing_support::scratch_dir;

namespace {

AuditConfig small_config(const std::string& preset, std::size_t n_docs = 500) {
  std::istringstream in("[synthetic]\npreset = " + preset + "\nn_docs = " + std::to_string(n_docs) +
                        "\n[audit]\nseed = 11\n"
                        "[embed]\ndim = 16\nepochs = 5\nmin_count = 2\n"
                        "[project]\nsample_cap = 150\niterations = 300\nperplexity = 15\n");
  return parse_config(in);
}

}  // namespace

TEST(Verdict, DecisionRule) {
  const VerdictThresholds t;
  EXPECT_EQ(decide_verdict(0.54, 3.0, -0.1, t).kind, VerdictKind::subjective_suspect);
  EXPECT_EQ(decide_verdict(0.84, 1.2, 0.3, t).kind, VerdictKind::objective_like);
  EXPECT_EQ(decide_verdict(0.84, 1.2, std::nullopt, t).kind, VerdictKind::objective_like);
  // silhouette too high for subjective, F1 too low for objective
  EXPECT_EQ(decide_verdict(0.54, 3.0, 0.2, t).kind, VerdictKind::inconclusive);
  // boundaries: F1 = 0.60 is not < 0.60, imbalance = 2.0 is not > 2.0
  EXPECT_EQ(decide_verdict(0.60, 3.0, 0.0, t).kind, VerdictKind::inconclusive);
  EXPECT_EQ(decide_verdict(0.50, 2.0, 0.0, t).kind, VerdictKind::inconclusive);
  EXPECT_EQ(decide_verdict(0.75, 2.0, 0.9, t).kind, VerdictKind::objective_like);
  EXPECT_EQ(decide_verdict(std::nullopt, 3.0, 0.0, t).kind, VerdictKind::inconclusive);
  EXPECT_EQ(decide_verdict(0.9, std::nullopt, 0.0, t).kind, VerdictKind::inconclusive);
  EXPECT_FALSE(decide_verdict(0.54, 3.0, -0.1, t).evidence.empty());
}

TEST(Verdict, Names) {
  EXPECT_EQ(to_string(VerdictKind::objective_like), "objective-like");
  EXPECT_EQ(to_string(VerdictKind::subjective_suspect), "subjective-suspect");
  EXPECT_EQ(to_string(VerdictKind::inconclusive), "inconclusive");
}

TEST(ProjectionSample, SortedCappedDeterministic) {
  const auto a = projection_sample(1000, 100, 5);
  EXPECT_EQ(a.size(), 100u);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  EXPECT_EQ(std::adjacent_find(a.begin(), a.end()), a.end());
  EXPECT_EQ(a, projection_sample(1000, 100, 5));
  EXPECT_NE(a, projection_sample(1000, 100, 6));
  const auto all = projection_sample(30, 100, 5);
  ASSERT_EQ(all.size(), 30u);
  EXPECT_EQ(all.back(), 29u);
}

TEST(ClassDirectory, SanitizesNames) {
  EXPECT_EQ(class_directory("poverty_level"), "poverty_level");
  const auto d = class_directory("../primary focus/area");
  EXPECT_EQ(d.find('/'), std::string::npos);
  EXPECT_EQ(d.find(' '), std::string::npos);
  EXPECT_NE(d, "..");
}

TEST(Sha256, KnownVector) {
  const auto dir = scratch_dir("sha");
  testing_support::write_text(dir / "abc", "abc");
  EXPECT_EQ(sha256_file(dir / "abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(RunAudit, UnknownClassNamedInError) {
  auto cfg = small_config("objective", 100);
  cfg.target_classes = {"poverty_level"};
  try {
    run_audit(cfg);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("poverty_level"), std::string::npos);
  }
}

TEST(RunAudit, SmallObjectiveRunIsCompleteAndReproducible) {
  const auto cfg = small_config("objective");
  const auto report = run_audit(cfg);
  EXPECT_TRUE(report.complete());
  ASSERT_EQ(report.classes.size(), 1u);
  const auto& a = report.classes[0];
  EXPECT_EQ(a.target_class, "grade_level");
  ASSERT_TRUE(a.classification && a.indicative && a.projection && a.verdict);
  EXPECT_EQ(a.classification->n_train + a.classification->n_test, 500u);
  EXPECT_EQ(a.projection->labels.size(), 150u);
  EXPECT_EQ(a.verdict->kind, VerdictKind::objective_like);
  EXPECT_EQ(report_json(report), report_json(run_audit(cfg)));
}

TEST(RunAudit, StageFailureCarriesPartialReport) {
  auto cfg = small_config("objective", 100);
  cfg.embedding.min_count = 1000000;
  try {
    run_audit(cfg);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "project");
    EXPECT_FALSE(e.partial().complete());
    ASSERT_EQ(e.partial().classes.size(), 1u);
    EXPECT_TRUE(e.partial().classes[0].classification.has_value());

    const auto dir = scratch_dir("partial");
    const auto manifest = emit(e.partial(), dir);
    EXPECT_FALSE(manifest.complete);
    const auto text = read_text(dir / "MANIFEST");
    EXPECT_EQ(text.rfind("# INCOMPLETE", 0), 0u);
  }
}

TEST(Emit, WritesManifestWithStableHashes) {
  const auto report = run_audit(small_config("subjective"));
  const auto dir = scratch_dir("emit");
  const auto m1 = emit(report, dir);
  EXPECT_TRUE(m1.complete);
  EXPECT_GE(m1.files.size(), 7u);
  for (const auto& f : m1.files) {
    EXPECT_TRUE(std::filesystem::exists(dir / f.path)) << f.path;
    EXPECT_EQ(sha256_file(dir / f.path), f.sha256);
  }
  const auto m2 = emit(report, dir);
  ASSERT_EQ(m1.files.size(), m2.files.size());
  for (std::size_t i = 0; i < m1.files.size(); ++i) EXPECT_EQ(m1.files[i].sha256, m2.files[i].sha256);
  const auto names = [&] {
    std::vector<std::string> v;
    for (const auto& f : m1.files) v.push_back(f.path);
    return v;
  }();
  for (const auto* expected : {"report.json", "config.ini", "poverty_level/metrics.csv", "poverty_level/confusion.csv",
                               "poverty_level/nfis.csv", "poverty_level/nfis.svg", "poverty_level/tsne.csv",
                               "poverty_level/tsne.svg"}) {
    EXPECT_NE(std::find(names.begin(), names.end(), expected), names.end()) << expected;
  }
}

TEST(Emit, EmptyPathThrows) {
  SubjectivityReport r;
  EXPECT_THROW(emit(r, ""), InvalidArgument);
}

TEST(Emit, ConfigIniReloads) {
  const auto cfg = small_config("objective", 100);
  SubjectivityReport r;
  r.config = cfg;
  const auto dir = scratch_dir("emit_cfg");
  emit(r, dir);
  const auto back = load_config(dir / "config.ini");
  EXPECT_EQ(back.synthetic->n_docs, 100u);
  EXPECT_EQ(back.seed, 11u);
}

TEST(Svg, EscapesAndMarksMissingBars) {
  EXPECT_EQ(xml_escape("a<b>&\"c'"), "a&lt;b&gt;&amp;&quot;c&apos;");
  const std::vector<Bar> bars{{"Low & <b>", 2.0}, {"none", std::nullopt}};
  const auto svg = bar_chart_svg("t", "y", bars);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("Low &amp; &lt;b&gt;"), std::string::npos);
  EXPECT_NE(svg.find("n/a"), std::string::npos);
}

TEST(Svg, ScatterHasOnePointPerRowAndLegend) {
  DenseMatrix Y(3, 2);
  Y(1, 0) = 1.0;
  Y(2, 1) = 2.0;
  const std::vector<std::string> labels{"a", "b", "a"};
  const auto svg = scatter_svg("s", Y, labels);
  std::size_t circles = 0;
  for (auto p = svg.find("<circle"); p != std::string::npos; p = svg.find("<circle", p + 1)) ++circles;
  EXPECT_EQ(circles, 3u + 2u);
  EXPECT_THROW(scatter_svg("s", Y, std::vector<std::string>{"a"}), InvalidArgument);
}
