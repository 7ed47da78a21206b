#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "subjaudit/classify.hpp"
#include "subjaudit/config.hpp"
#include "subjaudit/corpus.hpp"
#include "subjaudit/embed.hpp"
#include "subjaudit/error.hpp"
#include "subjaudit/indicative.hpp"
#include "subjaudit/project.hpp"

namespace subjaudit {

struct ClassificationSection {
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::size_t vocabulary_size = 0;
  CrossValidationResult cv;
  ClassMetrics metrics;
  ConfusionMatrix confusion;
  /// Final primal objective of each one-vs-rest problem, in label order.
  std::vector<double> objectives;
};

struct IndicativeSection {
  std::size_t vocabulary_size = 0;
  NfisDistribution nfis;
  /// Highest-scoring terms per label, in label order.
  std::vector<std::vector<std::pair<std::string, double>>> top_terms;
};

/// The shared 2-D layout of the sampled documents.
struct ProjectionLayout {
  std::vector<std::string> ids;
  /// Positions of the sampled documents in the audited corpus.
  std::vector<std::size_t> rows;
  Projection2D projection;
  std::size_t embedding_vocabulary = 0;
  std::vector<double> embedding_objective;
};

struct ProjectionSection {
  std::size_t n_points = 0;
  double final_kl = 0.0;
  bool barnes_hut = false;
  Silhouette silhouette;
  /// Label of each sampled document for this class.
  std::vector<std::string> labels;
};

enum class VerdictKind { objective_like, subjective_suspect, inconclusive };
std::string to_string(VerdictKind kind);

struct Verdict {
  VerdictKind kind = VerdictKind::inconclusive;
  std::optional<double> macro_f1;
  std::optional<double> imbalance;
  std::optional<double> silhouette;
  /// One line per threshold comparison that was evaluated.
  std::vector<std::string> evidence;
};

/// subjective-suspect when macro-F1, NFIS imbalance and silhouette all fall
/// on the subjective side; objective-like when macro-F1 and imbalance fall
/// on the objective side; inconclusive otherwise, including when a
/// required value is missing.
Verdict decide_verdict(std::optional<double> macro_f1, std::optional<double> imbalance,
                       std::optional<double> silhouette, const VerdictThresholds& thresholds);

struct ClassAudit {
  std::string target_class;
  std::vector<LabelShare> distribution;
  std::optional<ClassificationSection> classification;
  std::optional<IndicativeSection> indicative;
  std::optional<ProjectionSection> projection;
  std::optional<Verdict> verdict;
};

struct StageFailure {
  std::string stage;
  std::string message;
};

struct SubjectivityReport {
  AuditConfig config;
  std::size_t documents_loaded = 0;
  std::size_t documents_audited = 0;
  std::optional<ProjectionLayout> layout;
  std::vector<ClassAudit> classes;
  /// Set when the run stopped early.
  std::optional<StageFailure> failure;

  bool complete() const { return !failure.has_value(); }
};

/// A stage of run_audit failed. Carries whatever was computed before.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& cause, SubjectivityReport partial);

  const std::string& stage() const { return stage_; }
  const std::string& cause() const { return cause_; }
  const SubjectivityReport& partial() const { return partial_; }

 private:
  std::string stage_;
  std::string cause_;
  SubjectivityReport partial_;
};

// Individual stages, also used by the standalone CLI subcommands.

/// Loads or generates the corpus, then applies the configured filters.
/// Returns the filtered corpus and the number of documents before filtering.
std::pair<LabeledCorpus, std::size_t> prepare_corpus(const AuditConfig& config);

/// Classes named in the config, or every class of the corpus. Throws
/// ConfigError naming an unknown class.
std::vector<std::string> audited_classes(const AuditConfig& config, const LabeledCorpus& corpus);

/// Split, vectorize on the training part, select C by cross-validation,
/// retrain and evaluate on the test part.
ClassificationSection run_classification(const LabeledCorpus& corpus, const std::string& target_class,
                                         const AuditConfig& config, LinearModel* model_out = nullptr,
                                         Vocabulary* vocabulary_out = nullptr);

/// chi2 table over document presence on the whole corpus and the NFIS
/// distribution. `table_out` receives the full table when given.
IndicativeSection run_indicative(const LabeledCorpus& corpus, const std::string& target_class,
                                 const AuditConfig& config, ChiSquareTable* table_out = nullptr);

/// Seeded sample of at most `cap` positions out of `n`, ascending.
std::vector<std::size_t> projection_sample(std::size_t n, std::size_t cap, std::uint64_t seed);

/// PV-DBOW on the whole corpus, then t-SNE of a seeded sample of its
/// document vectors.
ProjectionLayout run_projection(const LabeledCorpus& corpus, const AuditConfig& config,
                                EmbeddingModel* model_out = nullptr);

ProjectionSection summarize_projection(const ProjectionLayout& layout, const LabeledCorpus& corpus,
                                       const std::string& target_class);

/// Full pipeline. Throws ConfigError for an invalid config or unknown class
/// and StageError when a stage fails.
SubjectivityReport run_audit(const AuditConfig& config);

struct ManifestEntry {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct Manifest {
  std::vector<ManifestEntry> files;
  bool complete = true;
};

/// Writes report.json, config.ini, and per class metrics.csv, confusion.csv,
/// nfis.csv, nfis.svg, tsne.csv and tsne.svg (those whose stage finished)
/// into `outdir`, then MANIFEST with a SHA-256 line per file. An incomplete
/// report gets a first MANIFEST line "# INCOMPLETE ...". Throws
/// InvalidArgument for an empty path and IoError on write failures.
Manifest emit(const SubjectivityReport& report, const std::filesystem::path& outdir);

/// Per-label precision, recall, F1 and support, then a macro row.
std::string metrics_csv(const ClassificationSection& section);
/// Row-normalized confusion matrix, rows are true labels.
std::string confusion_csv(const ConfusionMatrix& confusion);
/// One row per label; an undefined score is an empty field.
std::string nfis_csv(const NfisDistribution& distribution);

/// The report.json document.
std::string report_json(const SubjectivityReport& report);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Directory-safe form of a class name.
std::string class_directory(const std::string& target_class);

}  // namespace subjaudit
