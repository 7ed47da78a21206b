// subjaudit: audit user-defined label classes for subjectivity.
//
// Exit codes: 0 success, 2 configuration or usage error, 3 stage failure.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "subjaudit/config.hpp"
#include "subjaudit/corpus.hpp"
#include "subjaudit/embed.hpp"
#include "subjaudit/groundtruth.hpp"
#include "subjaudit/project.hpp"
#include "subjaudit/report.hpp"
#include "subjaudit/svg.hpp"

namespace fs = std::filesystem;
using namespace subjaudit;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  bool deterministic = false;
  std::string out;
};

AuditConfig resolve_config(const GlobalFlags& g) {
  if (g.config.empty()) throw ConfigError("--config is required for this command");
  AuditConfig cfg = load_config(g.config);
  if (g.seed) cfg.apply_seed(*g.seed);
  if (g.deterministic) cfg.deterministic = true;
  if (!g.out.empty()) cfg.output_dir = g.out;
  if (cfg.output_dir.empty()) throw ConfigError("no output directory: pass --out or set [audit] output_dir");
  return cfg;
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string fixed(double x, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, x);
  return buf;
}

void print_metrics(const std::string& cls, const ClassificationSection& c) {
  std::cout << "# " << cls << " (train " << c.n_train << ", test " << c.n_test << ", C " << c.cv.best_C << ")\n";
  std::cout << "label,recall,precision,f1\n";
  for (const auto& m : c.metrics.per_label) {
    std::cout << m.label << ',' << fixed(m.recall, 2) << ',' << fixed(m.precision, 2) << ',' << fixed(m.f1, 2) << '\n';
  }
  std::cout << "macro_f1," << fixed(c.metrics.macro_f1, 2) << "\n";
  const auto norm = c.confusion.row_normalized();
  std::cout << "true\\predicted";
  for (const auto& l : c.confusion.labels()) std::cout << ',' << l;
  std::cout << '\n';
  for (std::size_t i = 0; i < c.confusion.size(); ++i) {
    std::cout << c.confusion.labels()[i];
    for (std::size_t j = 0; j < c.confusion.size(); ++j) std::cout << ',' << fixed(norm(i, j), 3);
    std::cout << '\n';
  }
}

int cmd_audit(const GlobalFlags& g) {
  const AuditConfig cfg = resolve_config(g);
  try {
    const auto report = run_audit(cfg);
    const auto manifest = emit(report, cfg.output_dir);
    std::cout << "class,macro_f1,nfis_imbalance,silhouette,verdict\n";
    for (const auto& a : report.classes) {
      const auto& v = *a.verdict;
      std::cout << a.target_class << ',' << (v.macro_f1 ? fixed(*v.macro_f1) : "") << ','
                << (v.imbalance ? fixed(*v.imbalance) : "") << ',' << (v.silhouette ? fixed(*v.silhouette) : "")
                << ',' << to_string(v.kind) << '\n';
    }
    std::cerr << "wrote " << manifest.files.size() << " files to " << cfg.output_dir.string() << '\n';
    return 0;
  } catch (const StageError& e) {
    try {
      emit(e.partial(), cfg.output_dir);
    } catch (const std::exception& inner) {
      std::cerr << "error: could not write partial artifacts: " << inner.what() << '\n';
    }
    std::cerr << "error: " << e.what() << '\n';
    return kExitStage;
  }
}

int cmd_synth(const GlobalFlags& g, const std::string& preset, std::optional<std::size_t> n_docs) {
  if (g.out.empty()) throw ConfigError("--out is required");
  SynthSpec spec = g.config.empty() ? preset_by_name(preset) : load_synth_spec(g.config);
  if (n_docs) spec.n_docs = *n_docs;
  if (g.seed) spec.seed = *g.seed;
  try {
    spec.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  const auto synth = generate_synthetic(spec);
  make_dir(g.out);
  write_jsonl(synth.corpus, fs::path(g.out) / "corpus.jsonl");
  std::ofstream truth(fs::path(g.out) / "truth.csv");
  truth << "id,true_label\n";
  for (std::size_t i = 0; i < synth.corpus.size(); ++i) truth << synth.corpus[i].id << ',' << synth.true_labels[i] << '\n';

  std::cout << "label,count,percent\n";
  for (const auto& s : label_distribution(synth.corpus, spec.target_class)) {
    std::cout << s.label << ',' << s.count << ',' << fixed(s.percent, 2) << '\n';
  }
  const auto tm = truth_matrix(synth.true_labels, synth.corpus.labels(spec.target_class), spec.labels);
  std::cout << "true\\reported";
  for (const auto& l : spec.labels) std::cout << ',' << l;
  std::cout << '\n';
  for (std::size_t i = 0; i < spec.labels.size(); ++i) {
    std::cout << spec.labels[i];
    for (std::size_t j = 0; j < spec.labels.size(); ++j) std::cout << ',' << fixed(tm(i, j), 1);
    std::cout << '\n';
  }
  return 0;
}

int cmd_classify(const GlobalFlags& g) {
  const AuditConfig cfg = resolve_config(g);
  const auto [corpus, loaded] = prepare_corpus(cfg);
  for (const auto& cls : audited_classes(cfg, corpus)) {
    LinearModel model;
    Vocabulary vocab;
    const auto section = run_classification(corpus, cls, cfg, &model, &vocab);
    const fs::path dir = cfg.output_dir / class_directory(cls);
    make_dir(dir);
    std::ofstream mout(dir / "model.txt");
    model.save(mout);
    std::ofstream vout(dir / "vocabulary.txt");
    vocab.save(vout);
    write_file(dir / "metrics.csv", metrics_csv(section));
    write_file(dir / "confusion.csv", confusion_csv(section.confusion));
    print_metrics(cls, section);
  }
  return 0;
}

int cmd_nfis(const GlobalFlags& g) {
  const AuditConfig cfg = resolve_config(g);
  const auto [corpus, loaded] = prepare_corpus(cfg);
  std::cout << "class,label,nfis\n";
  for (const auto& cls : audited_classes(cfg, corpus)) {
    const auto s = run_indicative(corpus, cls, cfg);
    const fs::path dir = cfg.output_dir / class_directory(cls);
    make_dir(dir);
    std::ostringstream top;
    top << "label,rank,term,chi2\n";
    std::vector<Bar> bars;
    for (std::size_t c = 0; c < s.nfis.labels.size(); ++c) {
      const auto& score = s.nfis.scores[c];
      std::cout << cls << ',' << s.nfis.labels[c] << ',' << (score ? fixed(*score, 2) : "undefined") << '\n';
      bars.push_back({s.nfis.labels[c], score});
      for (std::size_t r = 0; r < s.top_terms[c].size(); ++r) {
        top << csv_quote(s.nfis.labels[c]) << ',' << r + 1 << ',' << s.top_terms[c][r].first << ','
            << fixed(s.top_terms[c][r].second, 6) << '\n';
      }
    }
    std::cout << cls << ",imbalance," << (s.nfis.imbalance ? fixed(*s.nfis.imbalance, 2) : "undefined") << '\n';
    write_file(dir / "nfis.csv", nfis_csv(s.nfis));
    write_file(dir / "top_terms.csv", top.str());
    write_file(dir / "nfis.svg", bar_chart_svg("NFIS (K=" + std::to_string(s.nfis.K) + "): " + cls, "NFIS", bars));
  }
  return 0;
}

int cmd_embed(const GlobalFlags& g, std::string label_class) {
  const AuditConfig cfg = resolve_config(g);
  const auto [corpus, loaded] = prepare_corpus(cfg);
  if (label_class.empty()) label_class = audited_classes(cfg, corpus).front();
  if (!corpus.has_class(label_class)) throw ConfigError("unknown target class '" + label_class + "'");
  const auto model = train_pvdbow(corpus, cfg.embedding);
  make_dir(cfg.output_dir);
  model.save(cfg.output_dir / "model.bin");
  write_embeddings_csv(cfg.output_dir / "embeddings.csv", model.doc_ids(), corpus.labels(label_class),
                       model.doc_vectors());
  std::cout << "documents," << model.doc_ids().size() << "\nvocabulary," << model.words().size() << "\n";
  std::cout << "objective_first," << fixed(model.objective_trace().front(), 6) << "\nobjective_last,"
            << fixed(model.objective_trace().back(), 6) << "\n";
  return 0;
}

int cmd_project(const GlobalFlags& g, const std::string& embeddings) {
  const AuditConfig cfg = resolve_config(g);
  const auto table = read_embeddings_csv(embeddings);
  const auto rows = projection_sample(table.ids.size(), cfg.project.sample_cap, mix_seed(cfg.seed, 21));
  DenseMatrix X(rows.size(), table.vectors.cols);
  std::vector<std::string> ids, labels;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto src = table.vectors.row(rows[r]);
    std::copy(src.begin(), src.end(), X.row(r).begin());
    ids.push_back(table.ids[rows[r]]);
    labels.push_back(table.labels.empty() ? std::string() : table.labels[rows[r]]);
  }
  const auto proj = tsne(X, cfg.project.tsne);
  make_dir(cfg.output_dir);
  write_projection_csv(cfg.output_dir / "tsne.csv", ids, labels, proj.coordinates);
  write_file(cfg.output_dir / "tsne.svg", scatter_svg("t-SNE of document vectors", proj.coordinates, labels));
  std::cout << "points," << rows.size() << "\nfinal_kl," << fixed(proj.final_kl, 6) << '\n';
  if (!table.labels.empty()) {
    const auto s = silhouette(proj.coordinates, labels);
    std::cout << "silhouette," << fixed(s.overall) << '\n';
    for (const auto& [l, v] : s.per_label) std::cout << "silhouette:" << l << ',' << fixed(v) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Audit user-defined label classes for subjectivity"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalFlags g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config, "INI configuration file");
  auto* seed_opt = app.add_option("--seed", seed, "Root seed, overriding the config");
  app.add_flag("--deterministic", g.deterministic, "Record deterministic mode in the report (results are always reproducible)");
  app.add_option("--out", g.out, "Output directory, overriding the config");

  auto* audit = app.add_subcommand("audit", "Run the full pipeline and write the report");
  auto* classify = app.add_subcommand("classify", "Train and evaluate the linear SVM per class");
  auto* nfis = app.add_subcommand("nfis", "Chi-square scores and NFIS distribution per class");
  auto* embed = app.add_subcommand("embed", "Train PV-DBOW document vectors");
  std::string embed_class;
  embed->add_option("--class", embed_class, "Class whose labels go into embeddings.csv");
  auto* project = app.add_subcommand("project", "t-SNE of an embeddings CSV");
  std::string embeddings;
  project->add_option("--embeddings", embeddings, "CSV written by the embed command")->required();
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  std::string preset = "subjective";
  std::optional<std::size_t> n_docs;
  synth->add_option("--preset", preset, "objective | subjective | rating (ignored with --config)");
  synth->add_option("--n-docs", n_docs, "Number of documents");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  if (seed_opt->count() > 0) g.seed = seed;

  try {
    if (*audit) return cmd_audit(g);
    if (*classify) return cmd_classify(g);
    if (*nfis) return cmd_nfis(g);
    if (*embed) return cmd_embed(g, embed_class);
    if (*project) return cmd_project(g, embeddings);
    if (*synth) return cmd_synth(g, preset, n_docs);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitStage;
  }
  return kExitConfig;
}
