#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "subjaudit/classify.hpp"
#include "subjaudit/corpus.hpp"
#include "subjaudit/embed.hpp"
#include "subjaudit/groundtruth.hpp"
#include "subjaudit/project.hpp"
#include "subjaudit/vectorize.hpp"

namespace subjaudit {

struct FilterConfig {
  std::size_t min_chars = 0;
  std::optional<std::size_t> max_chars;
  /// One-sided word-count z-score cut; unset disables the filter.
  std::optional<double> z_max;
};

struct ClassifyConfig {
  double train_fraction = 0.7;
  std::size_t cv_folds = 10;
  std::vector<double> cv_grid{5.0};
  SvmOptions svm;
};

struct ProjectConfig {
  /// Documents sampled (seeded) for the 2-D projection.
  std::size_t sample_cap = 5000;
  TsneOptions tsne;
};

struct VerdictThresholds {
  double subjective_max_f1 = 0.60;
  double subjective_min_imbalance = 2.0;
  double subjective_max_silhouette = 0.05;
  double objective_min_f1 = 0.75;
  double objective_max_imbalance = 2.0;
};

/// Everything run_audit needs. Exactly one of `input` and `synthetic` is
/// set. `seed` is the root of every stage's seed.
struct AuditConfig {
  std::optional<LoadOptions> input;
  std::optional<SynthSpec> synthetic;
  /// Classes to audit; empty means every target class in the corpus.
  std::vector<std::string> target_classes;
  FilterConfig filter;
  VocabularyOptions vocabulary;
  ClassifyConfig classify;
  std::size_t nfis_k = 100;
  EmbeddingOptions embedding;
  ProjectConfig project;
  VerdictThresholds verdict;
  std::uint64_t seed = 1;
  /// Informational: every stage is reproducible at any thread count.
  bool deterministic = true;
  std::filesystem::path output_dir;

  /// Propagates `seed` into the stage options that carry their own seed.
  void apply_seed(std::uint64_t new_seed);
  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

/// INI format, one section per stage:
///
///   [input]      path, format (jsonl|csv), text_fields, class_fields,
///                id_field, on_missing (skip|error)
///   [synthetic]  preset (objective|subjective|rating, default subjective),
///                n_docs, labels, priors, signal_terms_per_label, signal_strength,
///                corruption (rows separated by ';'), vocab_noise,
///                noise_tokens, target_class, seed
///   [audit]      target_classes, seed, deterministic, output_dir
///   [filter]     min_chars, max_chars, z_max
///   [vectorize]  ngram_max, min_df
///   [classify]   train_fraction, cv_folds, cv_grid, C (alias for a
///                one-element cv_grid), max_epochs, tolerance, bias
///   [nfis]       k
///   [embed]      dim, min_count, negatives, epochs, window, alpha,
///                min_alpha, objective_sample
///   [project]    sample_cap, perplexity, learning_rate, iterations,
///                exaggeration, exaggeration_iterations, theta, exact_limit
///   [verdict]    subjective_max_f1, subjective_min_imbalance,
///                subjective_max_silhouette, objective_min_f1,
///                objective_max_imbalance
///
/// Lists are comma separated. Unknown sections or keys are errors. Relative
/// input paths are resolved against the config file's directory.
AuditConfig load_config(const std::filesystem::path& path);
AuditConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});

/// Writes every resolved setting in the same INI format.
void write_config(const AuditConfig& config, std::ostream& out);

/// Reads only a [synthetic] section.
SynthSpec load_synth_spec(const std::filesystem::path& path);

}  // namespace subjaudit
