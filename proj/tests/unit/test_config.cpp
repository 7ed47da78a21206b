#include <gtest/gtest.h>

#include <sstream>

#include "subjaudit/config.hpp"
#include "subjaudit/error.hpp"
#include "support.hpp"

using namespace subjaudit;

namespace {

AuditConfig parse(const std::string& text, const std::filesystem::path& base = {}) {
  std::istringstream in(text);
  return parse_config(in, base);
}

}  // namespace

TEST(Config, SyntheticDefaultsToSubjectivePreset) {
  const auto cfg = parse("[synthetic]\nn_docs = 123\n");
  ASSERT_TRUE(cfg.synthetic.has_value());
  EXPECT_EQ(cfg.synthetic->n_docs, 123u);
  EXPECT_EQ(cfg.synthetic->labels, subjective_preset().labels);
  EXPECT_FALSE(cfg.input.has_value());
  EXPECT_EQ(cfg.classify.cv_grid, std::vector<double>{5.0});
  EXPECT_EQ(cfg.nfis_k, 100u);
}

TEST(Config, ReadsEverySection) {
  const auto cfg = parse(
      "[synthetic]\npreset = objective\n"
      "[audit]\nseed = 42\ndeterministic = false\ntarget_classes = grade_level\noutput_dir = out\n"
      "[filter]\nmin_chars = 10\nmax_chars = 400\nz_max = 1.28\n"
      "[vectorize]\nngram_max = 1\nmin_df = 3\n"
      "[classify]\ntrain_fraction = 0.8\ncv_folds = 3\ncv_grid = 0.5, 5\nmax_epochs = 50\n"
      "[nfis]\nk = 20\n"
      "[embed]\ndim = 32\nepochs = 4\nwindow = 5\n"
      "[project]\nsample_cap = 100\nperplexity = 12\nlearning_rate = 100\niterations = 300\n"
      "[verdict]\nobjective_min_f1 = 0.8\n");
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_FALSE(cfg.deterministic);
  EXPECT_EQ(cfg.target_classes, std::vector<std::string>{"grade_level"});
  EXPECT_EQ(cfg.filter.min_chars, 10u);
  EXPECT_EQ(cfg.filter.max_chars, 400u);
  EXPECT_DOUBLE_EQ(*cfg.filter.z_max, 1.28);
  EXPECT_EQ(cfg.vocabulary.ngram_max, 1);
  EXPECT_EQ(cfg.vocabulary.min_df, 3u);
  EXPECT_DOUBLE_EQ(cfg.classify.train_fraction, 0.8);
  EXPECT_EQ(cfg.classify.cv_grid, (std::vector<double>{0.5, 5.0}));
  EXPECT_EQ(cfg.classify.svm.max_epochs, 50);
  EXPECT_EQ(cfg.nfis_k, 20u);
  EXPECT_EQ(cfg.embedding.dim, 32u);
  EXPECT_EQ(cfg.embedding.window, 5u);
  EXPECT_EQ(cfg.project.sample_cap, 100u);
  EXPECT_DOUBLE_EQ(cfg.project.tsne.perplexity, 12.0);
  EXPECT_DOUBLE_EQ(cfg.verdict.objective_min_f1, 0.8);
  EXPECT_EQ(cfg.output_dir, std::filesystem::path("out"));
}

TEST(Config, SeedPropagatesToStages) {
  const auto cfg = parse("[synthetic]\npreset = objective\n[audit]\nseed = 9\n");
  auto copy = cfg;
  copy.apply_seed(10);
  EXPECT_EQ(copy.seed, 10u);
  EXPECT_NE(copy.embedding.seed, cfg.embedding.seed);
  EXPECT_NE(copy.project.tsne.seed, cfg.project.tsne.seed);
}

TEST(Config, CAliasAndConflict) {
  EXPECT_EQ(parse("[synthetic]\n[classify]\nC = 2\n").classify.cv_grid, std::vector<double>{2.0});
  EXPECT_THROW(parse("[synthetic]\n[classify]\nC = 2\ncv_grid = 1, 2\n"), ConfigError);
}

TEST(Config, UnknownSectionKeyOrBadValueIsConfigError) {
  EXPECT_THROW(parse("[synthetic]\n[bogus]\nx = 1\n"), ConfigError);
  EXPECT_THROW(parse("[synthetic]\nnot_a_key = 1\n"), ConfigError);
  EXPECT_THROW(parse("[synthetic]\nn_docs = many\n"), ConfigError);
  EXPECT_THROW(parse("[synthetic]\npreset = mystery\n"), ConfigError);
  EXPECT_THROW(parse("[synthetic]\n[audit]\ndeterministic = maybe\n"), ConfigError);
}

TEST(Config, NeedsExactlyOneCorpusSource) {
  EXPECT_THROW(parse("[audit]\nseed = 1\n").validate(), ConfigError);
  EXPECT_THROW(parse("[input]\npath = a.jsonl\ntext_fields = t\nclass_fields = c\n[synthetic]\n").validate(),
               ConfigError);
}

TEST(Config, InputPathResolvesAgainstConfigDirectory) {
  const auto cfg = parse(
      "[input]\npath = data/c.csv\nformat = csv\ntext_fields = title, essay\nclass_fields = poverty_level\n"
      "id_field = id\non_missing = skip\n",
      "/srv/configs");
  ASSERT_TRUE(cfg.input.has_value());
  EXPECT_EQ(cfg.input->path, std::filesystem::path("/srv/configs/data/c.csv"));
  EXPECT_EQ(cfg.input->format, CorpusFormat::csv);
  EXPECT_EQ(cfg.input->text_fields, (std::vector<std::string>{"title", "essay"}));
  EXPECT_EQ(cfg.input->id_field, "id");
  EXPECT_EQ(cfg.input->on_missing, OnMissing::skip);
}

TEST(Config, CustomSyntheticLabelsAndCorruption) {
  const auto cfg = parse(
      "[synthetic]\nlabels = yes, no\npriors = 0.3, 0.7\ncorruption = 0.9, 0.1; 0.2, 0.8\n"
      "target_class = answer\n");
  const auto& s = *cfg.synthetic;
  EXPECT_EQ(s.labels, (std::vector<std::string>{"yes", "no"}));
  EXPECT_EQ(s.priors, (std::vector<double>{0.3, 0.7}));
  EXPECT_DOUBLE_EQ(s.corruption(1, 0), 0.2);
  EXPECT_EQ(s.target_class, "answer");
  EXPECT_THROW(parse("[synthetic]\nlabels = a, b\ncorruption = 1, 0\n"), ConfigError);
}

TEST(Config, WrittenConfigParsesBackToSameText) {
  const auto cfg = parse(
      "[synthetic]\npreset = rating\nn_docs = 77\n[audit]\nseed = 5\n[filter]\nz_max = 1.28\n"
      "[classify]\ncv_grid = 0.1, 1\n[project]\nperplexity = 7.5\n");
  std::ostringstream first;
  write_config(cfg, first);
  const auto back = parse(first.str());
  std::ostringstream second;
  write_config(back, second);
  EXPECT_EQ(first.str(), second.str());
  EXPECT_EQ(back.synthetic->labels, rating_preset().labels);
}

TEST(Config, LoadFromFileAndSynthSpec) {
  const auto dir = testing_support::scratch_dir("config_file");
  testing_support::write_text(dir / "a.ini", "[synthetic]\npreset = objective\nn_docs = 10\nseed = 4\n");
  EXPECT_EQ(load_config(dir / "a.ini").synthetic->n_docs, 10u);
  const auto spec = load_synth_spec(dir / "a.ini");
  EXPECT_EQ(spec.seed, 4u);
  EXPECT_EQ(spec.labels, objective_preset().labels);
  EXPECT_THROW(load_config(dir / "missing.ini"), ConfigError);
}
