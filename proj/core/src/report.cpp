#include "subjaudit/report.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "csv.hpp"
#include "subjaudit/groundtruth.hpp"
#include "subjaudit/rng.hpp"
#include "subjaudit/svg.hpp"

namespace subjaudit {

using nlohmann::json;

namespace {

// Stream ids for seeds derived from the root seed.
constexpr std::uint64_t kSplitStream = 11;
constexpr std::uint64_t kFoldStream = 12;
constexpr std::uint64_t kSampleStream = 21;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

json optional_number(const std::optional<double>& v) {
  if (v && std::isfinite(*v)) return *v;
  return nullptr;
}

std::vector<std::size_t> label_indices(std::span<const std::string> y, const std::vector<std::string>& labels) {
  std::vector<std::size_t> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    out[i] = static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), y[i]) - labels.begin());
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

json classification_json(const ClassificationSection& c) {
  json cv = json::array();
  for (const auto& [C, f1] : c.cv.mean_macro_f1) cv.push_back({{"C", C}, {"mean_macro_f1", f1}});
  json per_label = json::array();
  for (const auto& m : c.metrics.per_label) {
    per_label.push_back(
        {{"label", m.label}, {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}});
  }
  json counts = json::array();
  for (std::size_t i = 0; i < c.confusion.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < c.confusion.size(); ++j) row.push_back(c.confusion.count(i, j));
    counts.push_back(std::move(row));
  }
  return {{"n_train", c.n_train},
          {"n_test", c.n_test},
          {"vocabulary_size", c.vocabulary_size},
          {"best_C", c.cv.best_C},
          {"cross_validation", cv},
          {"macro_f1", c.metrics.macro_f1},
          {"per_label", per_label},
          {"confusion", {{"labels", c.confusion.labels()}, {"counts", counts}}},
          {"objectives", c.objectives}};
}

json indicative_json(const IndicativeSection& s) {
  json scores = json::array();
  json top = json::object();
  for (std::size_t c = 0; c < s.nfis.labels.size(); ++c) {
    scores.push_back({{"label", s.nfis.labels[c]}, {"nfis", optional_number(s.nfis.scores[c])}});
    json terms = json::array();
    for (const auto& [term, score] : s.top_terms[c]) terms.push_back({{"term", term}, {"chi2", score}});
    top[s.nfis.labels[c]] = std::move(terms);
  }
  return {{"K", s.nfis.K},
          {"vocabulary_size", s.vocabulary_size},
          {"nfis", scores},
          {"imbalance", optional_number(s.nfis.imbalance)},
          {"top_terms", top}};
}

json verdict_json(const Verdict& v, const VerdictThresholds& t) {
  return {{"verdict", to_string(v.kind)},
          {"macro_f1", optional_number(v.macro_f1)},
          {"imbalance", optional_number(v.imbalance)},
          {"silhouette", optional_number(v.silhouette)},
          {"thresholds",
           {{"subjective_max_f1", t.subjective_max_f1},
            {"subjective_min_imbalance", t.subjective_min_imbalance},
            {"subjective_max_silhouette", t.subjective_max_silhouette},
            {"objective_min_f1", t.objective_min_f1},
            {"objective_max_imbalance", t.objective_max_imbalance}}},
          {"evidence", v.evidence}};
}

}  // namespace

std::string metrics_csv(const ClassificationSection& c) {
  std::ostringstream out;
  out << "label,precision,recall,f1,support\n";
  std::size_t total = 0;
  for (const auto& m : c.metrics.per_label) {
    out << detail::csv_field(m.label) << ',' << fmt(m.precision) << ',' << fmt(m.recall) << ',' << fmt(m.f1) << ','
        << m.support << '\n';
    total += m.support;
  }
  out << "macro,,," << fmt(c.metrics.macro_f1) << ',' << total << '\n';
  return out.str();
}

std::string confusion_csv(const ConfusionMatrix& cm) {
  const DenseMatrix norm = cm.row_normalized();
  std::ostringstream out;
  out << "true\\predicted";
  for (const auto& l : cm.labels()) out << ',' << detail::csv_field(l);
  out << '\n';
  for (std::size_t i = 0; i < cm.size(); ++i) {
    out << detail::csv_field(cm.labels()[i]);
    for (std::size_t j = 0; j < cm.size(); ++j) out << ',' << fmt(norm(i, j));
    out << '\n';
  }
  return out.str();
}

std::string nfis_csv(const NfisDistribution& d) {
  std::ostringstream out;
  out << "label,nfis\n";
  for (std::size_t c = 0; c < d.labels.size(); ++c) {
    out << detail::csv_field(d.labels[c]) << ',' << (d.scores[c] ? fmt(*d.scores[c]) : "") << '\n';
  }
  return out.str();
}

std::string to_string(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::objective_like: return "objective-like";
    case VerdictKind::subjective_suspect: return "subjective-suspect";
    case VerdictKind::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

Verdict decide_verdict(std::optional<double> macro_f1, std::optional<double> imbalance,
                       std::optional<double> silhouette, const VerdictThresholds& t) {
  Verdict v;
  v.macro_f1 = macro_f1;
  v.imbalance = imbalance;
  v.silhouette = silhouette;
  const auto compare = [&](const char* name, const std::optional<double>& value, const char* op, double threshold,
                           bool holds) {
    v.evidence.push_back(std::string(name) + " " + (value ? fmt(*value) : "undefined") + " " + op + " " +
                         fmt(threshold) + ": " + (holds ? "yes" : "no"));
    return holds;
  };

  const bool f1_low = compare("macro_f1", macro_f1, "<", t.subjective_max_f1, macro_f1 && *macro_f1 < t.subjective_max_f1);
  const bool imb_high = compare("nfis_imbalance", imbalance, ">", t.subjective_min_imbalance,
                                imbalance && *imbalance > t.subjective_min_imbalance);
  const bool sil_low = compare("silhouette", silhouette, "<", t.subjective_max_silhouette,
                               silhouette && *silhouette < t.subjective_max_silhouette);
  if (f1_low && imb_high && sil_low) {
    v.kind = VerdictKind::subjective_suspect;
    return v;
  }
  const bool f1_high = compare("macro_f1", macro_f1, ">=", t.objective_min_f1, macro_f1 && *macro_f1 >= t.objective_min_f1);
  const bool imb_low = compare("nfis_imbalance", imbalance, "<=", t.objective_max_imbalance,
                               imbalance && *imbalance <= t.objective_max_imbalance);
  v.kind = f1_high && imb_low ? VerdictKind::objective_like : VerdictKind::inconclusive;
  return v;
}

StageError::StageError(std::string stage, const std::string& cause, SubjectivityReport partial)
    : Error("stage '" + stage + "' failed: " + cause),
      stage_(std::move(stage)),
      cause_(cause),
      partial_(std::move(partial)) {
  partial_.failure = StageFailure{stage_, cause_};
}

std::pair<LabeledCorpus, std::size_t> prepare_corpus(const AuditConfig& config) {
  LabeledCorpus corpus = config.synthetic ? generate_synthetic(*config.synthetic).corpus : load_corpus(*config.input);
  const std::size_t loaded = corpus.size();
  if (config.filter.min_chars > 0 || config.filter.max_chars) {
    corpus = filter_by_char_length(corpus, config.filter.min_chars,
                                   config.filter.max_chars.value_or(std::numeric_limits<std::size_t>::max()));
  }
  if (config.filter.z_max) corpus = filter_by_length_zscore(corpus, *config.filter.z_max);
  if (corpus.empty()) throw InvalidArgument("no documents left after filtering");
  return {std::move(corpus), loaded};
}

std::vector<std::string> audited_classes(const AuditConfig& config, const LabeledCorpus& corpus) {
  if (config.target_classes.empty()) return corpus.target_classes();
  for (const auto& c : config.target_classes) {
    if (!corpus.has_class(c)) throw ConfigError("unknown target class '" + c + "'");
  }
  return config.target_classes;
}

ClassificationSection run_classification(const LabeledCorpus& corpus, const std::string& target_class,
                                         const AuditConfig& config, LinearModel* model_out,
                                         Vocabulary* vocabulary_out) {
  const auto& labels = corpus.label_set(target_class);
  if (labels.size() < 2) throw InvalidArgument("class '" + target_class + "' has a single label");
  const auto split =
      stratified_split(corpus, target_class, config.classify.train_fraction, mix_seed(config.seed, kSplitStream));
  const Vocabulary vocab = build_vocabulary(split.train, config.vocabulary);
  const SparseMatrix X_train = tfidf_transform(split.train, vocab);
  const SparseMatrix X_test = tfidf_transform(split.test, vocab);
  const auto y_train = split.train.labels(target_class);
  const auto y_test = split.test.labels(target_class);

  ClassificationSection out;
  out.n_train = split.train.size();
  out.n_test = split.test.size();
  out.vocabulary_size = vocab.size();
  SvmOptions svm = config.classify.svm;
  if (config.classify.cv_grid.size() > 1) {
    out.cv = cross_validate(X_train, y_train, config.classify.cv_folds, config.classify.cv_grid,
                            mix_seed(config.seed, kFoldStream), svm);
  } else {
    out.cv.best_C = config.classify.cv_grid.front();
  }
  svm.C = out.cv.best_C;
  LinearModel model = train_svm(X_train, y_train, svm, labels);
  const auto predicted = predict(model, X_test);
  out.confusion = confusion_matrix(y_test, predicted, labels);
  out.metrics = f1_metrics(out.confusion);
  out.objectives = model.objectives();
  if (model_out) *model_out = std::move(model);
  if (vocabulary_out) *vocabulary_out = vocab;
  return out;
}

IndicativeSection run_indicative(const LabeledCorpus& corpus, const std::string& target_class,
                                 const AuditConfig& config, ChiSquareTable* table_out) {
  const auto& labels = corpus.label_set(target_class);
  const Vocabulary vocab = build_vocabulary(corpus, config.vocabulary);
  if (vocab.size() == 0) throw InvalidArgument("empty vocabulary");
  const SparseMatrix presence = binarize(tfidf_transform(corpus, vocab, false));
  const auto y = corpus.labels(target_class);
  ChiSquareTable table = chi2_table(presence, label_indices(y, labels), labels, vocab.terms());

  IndicativeSection out;
  out.vocabulary_size = vocab.size();
  out.nfis = nfis_distribution(table, std::min(config.nfis_k, vocab.size()));
  for (std::size_t c = 0; c < labels.size(); ++c) out.top_terms.push_back(table.top_terms(c, 10));
  if (table_out) *table_out = std::move(table);
  return out;
}

std::vector<std::size_t> projection_sample(std::size_t n, std::size_t cap, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  if (n <= cap) return idx;
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(idx));
  idx.resize(cap);
  std::sort(idx.begin(), idx.end());
  return idx;
}

ProjectionLayout run_projection(const LabeledCorpus& corpus, const AuditConfig& config, EmbeddingModel* model_out) {
  EmbeddingModel model = train_pvdbow(corpus, config.embedding);
  ProjectionLayout layout;
  layout.rows = projection_sample(corpus.size(), config.project.sample_cap, mix_seed(config.seed, kSampleStream));
  const auto& vectors = model.doc_vectors();
  DenseMatrix X(layout.rows.size(), vectors.cols);
  for (std::size_t r = 0; r < layout.rows.size(); ++r) {
    const auto src = vectors.row(layout.rows[r]);
    std::copy(src.begin(), src.end(), X.row(r).begin());
    layout.ids.push_back(corpus[layout.rows[r]].id);
  }
  layout.projection = tsne(X, config.project.tsne);
  layout.embedding_vocabulary = model.words().size();
  layout.embedding_objective = model.objective_trace();
  if (model_out) *model_out = std::move(model);
  return layout;
}

ProjectionSection summarize_projection(const ProjectionLayout& layout, const LabeledCorpus& corpus,
                                       const std::string& target_class) {
  ProjectionSection out;
  out.n_points = layout.rows.size();
  out.final_kl = layout.projection.final_kl;
  out.barnes_hut = layout.projection.barnes_hut;
  for (const auto r : layout.rows) out.labels.push_back(corpus[r].label(target_class));
  out.silhouette = silhouette(layout.projection.coordinates, out.labels);
  return out;
}

SubjectivityReport run_audit(const AuditConfig& config) {
  config.validate();
  SubjectivityReport report;
  report.config = config;

  // Runs one stage, converting any failure other than a config error into a
  // StageError that carries the report so far.
  const auto stage = [&](const std::string& name, auto&& body) {
    try {
      return body();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(name, e.what(), report);
    }
  };

  LabeledCorpus corpus;
  stage("load", [&] {
    auto [c, loaded] = prepare_corpus(config);
    corpus = std::move(c);
    report.documents_loaded = loaded;
    report.documents_audited = corpus.size();
    return 0;
  });
  const auto classes = audited_classes(config, corpus);

  for (const auto& cls : classes) {
    ClassAudit audit;
    audit.target_class = cls;
    audit.distribution = label_distribution(corpus, cls);
    report.classes.push_back(audit);
    auto& current = report.classes.back();
    current.classification = stage("classify", [&] { return run_classification(corpus, cls, config); });
    current.indicative = stage("nfis", [&] { return run_indicative(corpus, cls, config); });
  }

  report.layout = stage("project", [&] { return run_projection(corpus, config); });
  for (auto& audit : report.classes) {
    audit.projection = stage("project", [&] { return summarize_projection(*report.layout, corpus, audit.target_class); });
    audit.verdict = decide_verdict(audit.classification->metrics.macro_f1, audit.indicative->nfis.imbalance,
                                   audit.projection->silhouette.overall, config.verdict);
  }
  return report;
}

std::string class_directory(const std::string& target_class) {
  std::string out;
  for (const char c : target_class) {
    const bool safe = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    out += safe ? c : '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

std::string report_json(const SubjectivityReport& r) {
  json doc;
  doc["tool"] = "subjaudit";
  doc["format_version"] = 1;
  doc["complete"] = r.complete();
  doc["failure"] = r.failure ? json{{"stage", r.failure->stage}, {"message", r.failure->message}} : json(nullptr);
  doc["seed"] = r.config.seed;
  doc["deterministic"] = r.config.deterministic;
  // The output location is not part of what determines the numbers.
  AuditConfig reproducible = r.config;
  reproducible.output_dir.clear();
  std::ostringstream cfg;
  write_config(reproducible, cfg);
  doc["config_ini"] = cfg.str();
  doc["corpus"] = {{"documents_loaded", r.documents_loaded}, {"documents_audited", r.documents_audited}};

  if (r.layout) {
    const auto& p = r.layout->projection;
    json trace = json::array();
    for (const auto& [it, kl] : p.kl_trace) trace.push_back({{"iteration", it}, {"kl", kl}});
    doc["projection"] = {{"n_points", r.layout->rows.size()},
                         {"final_kl", p.final_kl},
                         {"barnes_hut", p.barnes_hut},
                         {"perplexity", p.options.perplexity},
                         {"learning_rate", p.options.learning_rate},
                         {"iterations", p.options.iterations},
                         {"kl_trace", trace},
                         {"embedding",
                          {{"dim", r.config.embedding.dim},
                           {"vocabulary_size", r.layout->embedding_vocabulary},
                           {"objective_trace", r.layout->embedding_objective}}}};
  } else {
    doc["projection"] = nullptr;
  }

  json classes = json::array();
  for (const auto& a : r.classes) {
    json dist = json::array();
    for (const auto& s : a.distribution) dist.push_back({{"label", s.label}, {"count", s.count}, {"percent", s.percent}});
    json entry{{"target_class", a.target_class}, {"directory", class_directory(a.target_class)}, {"distribution", dist}};
    entry["classification"] = a.classification ? classification_json(*a.classification) : json(nullptr);
    entry["indicative"] = a.indicative ? indicative_json(*a.indicative) : json(nullptr);
    if (a.projection) {
      json per = json::array();
      for (const auto& [label, s] : a.projection->silhouette.per_label) per.push_back({{"label", label}, {"silhouette", s}});
      entry["projection"] = {{"silhouette", a.projection->silhouette.overall}, {"per_label", per}};
    } else {
      entry["projection"] = nullptr;
    }
    entry["verdict"] = a.verdict ? verdict_json(*a.verdict, r.config.verdict) : json(nullptr);
    classes.push_back(std::move(entry));
  }
  doc["classes"] = std::move(classes);
  return doc.dump(2) + "\n";
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw IoError("SHA-256 initialisation failed");
  }
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

Manifest emit(const SubjectivityReport& report, const std::filesystem::path& outdir) {
  if (outdir.empty()) throw InvalidArgument("emit: empty output directory");
  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  if (ec) throw IoError("cannot create " + outdir.string() + ": " + ec.message());

  std::vector<std::string> written;
  const auto put = [&](const std::string& rel, const std::string& content) {
    write_text(outdir / rel, content);
    written.push_back(rel);
  };

  put("report.json", report_json(report));
  std::ostringstream cfg;
  write_config(report.config, cfg);
  put("config.ini", cfg.str());

  for (const auto& a : report.classes) {
    const std::string dir = class_directory(a.target_class);
    std::filesystem::create_directories(outdir / dir, ec);
    if (ec) throw IoError("cannot create " + (outdir / dir).string() + ": " + ec.message());
    if (a.classification) {
      put(dir + "/metrics.csv", metrics_csv(*a.classification));
      put(dir + "/confusion.csv", confusion_csv(a.classification->confusion));
    }
    if (a.indicative) {
      put(dir + "/nfis.csv", nfis_csv(a.indicative->nfis));
      std::vector<Bar> bars;
      for (std::size_t c = 0; c < a.indicative->nfis.labels.size(); ++c) {
        bars.push_back({a.indicative->nfis.labels[c], a.indicative->nfis.scores[c]});
      }
      put(dir + "/nfis.svg", bar_chart_svg("NFIS (K=" + std::to_string(a.indicative->nfis.K) + "): " + a.target_class,
                                           "NFIS", bars));
    }
    if (a.projection && report.layout) {
      const auto rel = dir + "/tsne.csv";
      write_projection_csv(outdir / rel, report.layout->ids, a.projection->labels,
                           report.layout->projection.coordinates);
      written.push_back(rel);
      put(dir + "/tsne.svg",
          scatter_svg("t-SNE of document vectors: " + a.target_class, report.layout->projection.coordinates,
                      a.projection->labels));
    }
  }

  Manifest manifest;
  manifest.complete = report.complete();
  std::sort(written.begin(), written.end());
  std::ostringstream lines;
  if (report.failure) {
    lines << "# INCOMPLETE: stage '" << report.failure->stage << "' failed: " << report.failure->message << '\n';
  }
  for (const auto& rel : written) {
    ManifestEntry e{rel, sha256_file(outdir / rel), std::filesystem::file_size(outdir / rel)};
    lines << e.sha256 << "  " << e.path << '\n';
    manifest.files.push_back(std::move(e));
  }
  write_text(outdir / "MANIFEST", lines.str());
  return manifest;
}

}  // namespace subjaudit
