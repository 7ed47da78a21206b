#include "subjaudit/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

#include "subjaudit/error.hpp"

namespace subjaudit {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"input", {"path", "format", "text_fields", "class_fields", "id_field", "on_missing"}},
      {"synthetic",
       {"preset", "n_docs", "labels", "priors", "signal_terms_per_label", "signal_strength", "corruption",
        "vocab_noise", "noise_tokens", "target_class", "seed"}},
      {"audit", {"target_classes", "seed", "deterministic", "output_dir"}},
      {"filter", {"min_chars", "max_chars", "z_max"}},
      {"vectorize", {"ngram_max", "min_df"}},
      {"classify", {"train_fraction", "cv_folds", "cv_grid", "C", "max_epochs", "tolerance", "bias"}},
      {"nfis", {"k"}},
      {"embed", {"dim", "min_count", "negatives", "epochs", "window", "alpha", "min_alpha", "objective_sample"}},
      {"project",
       {"sample_cap", "perplexity", "learning_rate", "iterations", "exaggeration", "exaggeration_iterations",
        "theta", "exact_limit"}},
      {"verdict",
       {"subjective_max_f1", "subjective_min_imbalance", "subjective_max_silhouette", "objective_min_f1",
        "objective_max_imbalance"}},
  };
  return keys;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Reads typed values from one section, reporting the offending key.
class Section {
 public:
  Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  bool present() const { return tree_ != nullptr; }

  std::optional<std::string> text(const std::string& key) const {
    if (!tree_) return std::nullopt;
    const auto v = tree_->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    auto t = trim(*v);
    if (t.empty()) return std::nullopt;
    return t;
  }

  template <typename T>
  void read(const std::string& key, T& target) const {
    if (const auto v = get<T>(key)) target = *v;
  }

  template <typename T>
  std::optional<T> get(const std::string& key) const {
    const auto v = text(key);
    if (!v) return std::nullopt;
    return convert<T>(key, *v);
  }

  std::vector<double> reals(const std::string& key, const std::string& value) const {
    std::vector<double> out;
    for (const auto& item : split_list(value)) out.push_back(convert<double>(key, item));
    return out;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError("[" + name_ + "] " + key + ": " + what);
  }

  template <typename T>
  T convert(const std::string& key, const std::string& value) const {
    if constexpr (std::is_same_v<T, bool>) {
      if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
      if (value == "false" || value == "0" || value == "no" || value == "off") return false;
      fail(key, "expected a boolean, got '" + value + "'");
    } else if constexpr (std::is_same_v<T, std::string>) {
      return value;
    } else {
      std::istringstream in(value);
      T out{};
      if constexpr (std::is_unsigned_v<T>) {
        if (!value.empty() && value[0] == '-') fail(key, "expected a non-negative integer, got '" + value + "'");
      }
      in >> out;
      if (!in || !(in >> std::ws).eof()) fail(key, "cannot parse '" + value + "'");
      if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(out)) fail(key, "value must be finite");
      }
      return out;
    }
  }

 private:
  const pt::ptree* tree_;
  std::string name_;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

std::string join(const std::vector<double>& items) {
  std::string out;
  for (const double x : items) out += (out.empty() ? "" : ", ") + fmt(x);
  return out;
}

SynthSpec read_synth(const Section& s, std::uint64_t default_seed) {
  SynthSpec spec = subjective_preset();
  if (const auto p = s.text("preset")) {
    try {
      spec = preset_by_name(*p);
    } catch (const InvalidArgument& e) {
      s.fail("preset", e.what());
    }
  }
  spec.seed = default_seed;
  s.read("n_docs", spec.n_docs);
  s.read("signal_terms_per_label", spec.signal_terms_per_label);
  s.read("signal_strength", spec.signal_strength);
  s.read("vocab_noise", spec.vocab_noise);
  s.read("noise_tokens", spec.noise_tokens);
  s.read("target_class", spec.target_class);
  s.read("seed", spec.seed);
  if (const auto v = s.text("labels")) {
    spec.labels = split_list(*v);
    // A new label set invalidates the preset's priors and corruption.
    spec.priors.clear();
    spec.corruption = DenseMatrix();
  }
  if (const auto v = s.text("priors")) spec.priors = s.reals("priors", *v);
  if (const auto v = s.text("corruption")) {
    const auto rows = split_list(*v, ';');
    const std::size_t m = rows.size();
    spec.corruption = DenseMatrix(m, m);
    for (std::size_t r = 0; r < m; ++r) {
      const auto vals = s.reals("corruption", rows[r]);
      if (vals.size() != m) s.fail("corruption", "expected a square matrix with rows separated by ';'");
      for (std::size_t c = 0; c < m; ++c) spec.corruption(r, c) = vals[c];
    }
  }
  try {
    spec.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("[synthetic] ") + e.what());
  }
  return spec;
}

pt::ptree read_tree(std::istream& in) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  pt::ptree tree;
  try {
    std::istringstream body(text);
    pt::read_ini(body, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  // read_ini drops sections without keys, but "[synthetic]" alone is meaningful.
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    const auto t = trim(line);
    if (t.size() > 2 && t.front() == '[' && t.back() == ']') {
      const auto name = trim(t.substr(1, t.size() - 2));
      if (!tree.get_child_optional(pt::ptree::path_type(name, '\0'))) {
        tree.push_back({name, pt::ptree()});
      }
    }
  }
  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) {
      if (!body.data().empty()) throw ConfigError("config key '" + section + "' must be inside a section");
      throw ConfigError("unknown config section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) throw ConfigError("unknown key '" + key + "' in section [" + section + "]");
    }
  }
  return tree;
}

Section section(const pt::ptree& tree, const std::string& name) {
  const auto child = tree.get_child_optional(name);
  return Section(child ? &*child : nullptr, name);
}

}  // namespace

void AuditConfig::apply_seed(std::uint64_t new_seed) {
  seed = new_seed;
  classify.svm.seed = new_seed;
  embedding.seed = new_seed;
  project.tsne.seed = new_seed;
  if (synthetic) synthetic->seed = new_seed;
}

void AuditConfig::validate() const {
  if (input.has_value() == synthetic.has_value()) {
    throw ConfigError("exactly one of [input] and [synthetic] must be given");
  }
  if (input) {
    if (input->path.empty()) throw ConfigError("[input] path is required");
    if (input->text_fields.empty()) throw ConfigError("[input] text_fields is required");
    if (input->class_fields.empty()) throw ConfigError("[input] class_fields is required");
  }
  if (filter.max_chars && *filter.max_chars < filter.min_chars) {
    throw ConfigError("[filter] max_chars must be >= min_chars");
  }
  if (vocabulary.ngram_max != 1 && vocabulary.ngram_max != 2) throw ConfigError("[vectorize] ngram_max must be 1 or 2");
  if (vocabulary.min_df < 1) throw ConfigError("[vectorize] min_df must be >= 1");
  if (!(classify.train_fraction > 0.0 && classify.train_fraction < 1.0)) {
    throw ConfigError("[classify] train_fraction must be in (0, 1)");
  }
  if (classify.cv_folds < 2) throw ConfigError("[classify] cv_folds must be >= 2");
  if (classify.cv_grid.empty()) throw ConfigError("[classify] cv_grid must not be empty");
  for (const double c : classify.cv_grid) {
    if (!(c > 0.0)) throw ConfigError("[classify] every C must be positive");
  }
  if (classify.svm.max_epochs < 1) throw ConfigError("[classify] max_epochs must be >= 1");
  if (!(classify.svm.tolerance > 0.0)) throw ConfigError("[classify] tolerance must be positive");
  if (nfis_k < 1) throw ConfigError("[nfis] k must be >= 1");
  if (embedding.dim < 1) throw ConfigError("[embed] dim must be >= 1");
  if (embedding.negatives < 1) throw ConfigError("[embed] negatives must be >= 1");
  if (embedding.epochs < 0) throw ConfigError("[embed] epochs must be >= 0");
  if (!(embedding.alpha > 0.0) || embedding.min_alpha < 0.0 || embedding.min_alpha > embedding.alpha) {
    throw ConfigError("[embed] need 0 <= min_alpha <= alpha and alpha > 0");
  }
  if (project.sample_cap < 3) throw ConfigError("[project] sample_cap must be >= 3");
  if (!(project.tsne.perplexity >= 2.0)) throw ConfigError("[project] perplexity must be >= 2");
  if (!(project.tsne.learning_rate > 0.0)) throw ConfigError("[project] learning_rate must be positive");
  if (project.tsne.iterations < 0) throw ConfigError("[project] iterations must be >= 0");
  if (!(project.tsne.theta >= 0.0)) throw ConfigError("[project] theta must be >= 0");
}

AuditConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  const pt::ptree tree = read_tree(in);
  AuditConfig cfg;

  const auto audit = section(tree, "audit");
  audit.read("seed", cfg.seed);
  audit.read("deterministic", cfg.deterministic);
  if (const auto v = audit.text("target_classes")) cfg.target_classes = split_list(*v);
  if (const auto v = audit.text("output_dir")) cfg.output_dir = *v;

  if (const auto s = section(tree, "input"); s.present()) {
    LoadOptions opt;
    if (const auto v = s.text("path")) {
      opt.path = *v;
      if (opt.path.is_relative() && !base_dir.empty()) opt.path = base_dir / opt.path;
    }
    if (const auto v = s.text("format")) {
      try {
        opt.format = parse_corpus_format(*v);
      } catch (const InvalidArgument& e) {
        s.fail("format", e.what());
      }
    }
    if (const auto v = s.text("text_fields")) opt.text_fields = split_list(*v);
    if (const auto v = s.text("class_fields")) opt.class_fields = split_list(*v);
    if (const auto v = s.text("id_field")) opt.id_field = *v;
    if (const auto v = s.text("on_missing")) {
      try {
        opt.on_missing = parse_on_missing(*v);
      } catch (const InvalidArgument& e) {
        s.fail("on_missing", e.what());
      }
    }
    cfg.input = std::move(opt);
  }
  if (const auto s = section(tree, "synthetic"); s.present()) cfg.synthetic = read_synth(s, cfg.seed);

  const auto filter = section(tree, "filter");
  filter.read("min_chars", cfg.filter.min_chars);
  cfg.filter.max_chars = filter.get<std::size_t>("max_chars");
  cfg.filter.z_max = filter.get<double>("z_max");

  const auto vec = section(tree, "vectorize");
  vec.read("ngram_max", cfg.vocabulary.ngram_max);
  vec.read("min_df", cfg.vocabulary.min_df);

  const auto cls = section(tree, "classify");
  cls.read("train_fraction", cfg.classify.train_fraction);
  cls.read("cv_folds", cfg.classify.cv_folds);
  if (const auto v = cls.text("cv_grid")) cfg.classify.cv_grid = cls.reals("cv_grid", *v);
  if (const auto c = cls.get<double>("C")) {
    if (cls.text("cv_grid")) cls.fail("C", "give either C or cv_grid, not both");
    cfg.classify.cv_grid = {*c};
  }
  cls.read("max_epochs", cfg.classify.svm.max_epochs);
  cls.read("tolerance", cfg.classify.svm.tolerance);
  cls.read("bias", cfg.classify.svm.bias_feature);
  cfg.classify.svm.C = cfg.classify.cv_grid.front();

  section(tree, "nfis").read("k", cfg.nfis_k);

  const auto emb = section(tree, "embed");
  emb.read("dim", cfg.embedding.dim);
  emb.read("min_count", cfg.embedding.min_count);
  emb.read("negatives", cfg.embedding.negatives);
  emb.read("epochs", cfg.embedding.epochs);
  emb.read("window", cfg.embedding.window);
  emb.read("alpha", cfg.embedding.alpha);
  emb.read("min_alpha", cfg.embedding.min_alpha);
  emb.read("objective_sample", cfg.embedding.objective_sample);

  const auto proj = section(tree, "project");
  proj.read("sample_cap", cfg.project.sample_cap);
  proj.read("perplexity", cfg.project.tsne.perplexity);
  proj.read("learning_rate", cfg.project.tsne.learning_rate);
  proj.read("iterations", cfg.project.tsne.iterations);
  proj.read("exaggeration", cfg.project.tsne.exaggeration);
  proj.read("exaggeration_iterations", cfg.project.tsne.exaggeration_iterations);
  proj.read("theta", cfg.project.tsne.theta);
  proj.read("exact_limit", cfg.project.tsne.exact_limit);

  const auto ver = section(tree, "verdict");
  ver.read("subjective_max_f1", cfg.verdict.subjective_max_f1);
  ver.read("subjective_min_imbalance", cfg.verdict.subjective_min_imbalance);
  ver.read("subjective_max_silhouette", cfg.verdict.subjective_max_silhouette);
  ver.read("objective_min_f1", cfg.verdict.objective_min_f1);
  ver.read("objective_max_imbalance", cfg.verdict.objective_max_imbalance);

  const std::uint64_t synth_seed = cfg.synthetic ? cfg.synthetic->seed : 0;
  cfg.apply_seed(cfg.seed);
  if (cfg.synthetic && section(tree, "synthetic").text("seed")) cfg.synthetic->seed = synth_seed;
  cfg.validate();
  return cfg;
}

AuditConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path.string());
  return parse_config(in, path.parent_path());
}

SynthSpec load_synth_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path.string());
  const auto tree = read_tree(in);
  const auto s = section(tree, "synthetic");
  if (!s.present()) throw ConfigError(path.string() + ": no [synthetic] section");
  std::uint64_t seed = 1;
  section(tree, "audit").read("seed", seed);
  return read_synth(s, seed);
}

void write_config(const AuditConfig& c, std::ostream& out) {
  out << "[audit]\n";
  out << "seed = " << c.seed << "\n";
  out << "deterministic = " << (c.deterministic ? "true" : "false") << "\n";
  if (!c.target_classes.empty()) out << "target_classes = " << join(c.target_classes) << "\n";
  if (!c.output_dir.empty()) out << "output_dir = " << c.output_dir.string() << "\n";

  if (c.input) {
    const auto& in = *c.input;
    out << "\n[input]\n";
    out << "path = " << in.path.string() << "\n";
    out << "format = " << (in.format == CorpusFormat::jsonl ? "jsonl" : "csv") << "\n";
    out << "text_fields = " << join(in.text_fields) << "\n";
    out << "class_fields = " << join(in.class_fields) << "\n";
    if (in.id_field) out << "id_field = " << *in.id_field << "\n";
    out << "on_missing = " << (in.on_missing == OnMissing::skip ? "skip" : "error") << "\n";
  }
  if (c.synthetic) {
    const auto& s = *c.synthetic;
    out << "\n[synthetic]\n";
    out << "n_docs = " << s.n_docs << "\n";
    out << "labels = " << join(s.labels) << "\n";
    if (!s.priors.empty()) out << "priors = " << join(s.priors) << "\n";
    out << "signal_terms_per_label = " << s.signal_terms_per_label << "\n";
    out << "signal_strength = " << fmt(s.signal_strength) << "\n";
    out << "corruption = ";
    for (std::size_t r = 0; r < s.corruption.rows; ++r) {
      const auto row = s.corruption.row(r);
      out << (r ? "; " : "") << join(std::vector<double>(row.begin(), row.end()));
    }
    out << "\n";
    out << "vocab_noise = " << s.vocab_noise << "\n";
    out << "noise_tokens = " << s.noise_tokens << "\n";
    out << "target_class = " << s.target_class << "\n";
    out << "seed = " << s.seed << "\n";
  }

  out << "\n[filter]\n";
  out << "min_chars = " << c.filter.min_chars << "\n";
  if (c.filter.max_chars) out << "max_chars = " << *c.filter.max_chars << "\n";
  if (c.filter.z_max) out << "z_max = " << fmt(*c.filter.z_max) << "\n";

  out << "\n[vectorize]\n";
  out << "ngram_max = " << c.vocabulary.ngram_max << "\n";
  out << "min_df = " << c.vocabulary.min_df << "\n";

  out << "\n[classify]\n";
  out << "train_fraction = " << fmt(c.classify.train_fraction) << "\n";
  out << "cv_folds = " << c.classify.cv_folds << "\n";
  out << "cv_grid = " << join(c.classify.cv_grid) << "\n";
  out << "max_epochs = " << c.classify.svm.max_epochs << "\n";
  out << "tolerance = " << fmt(c.classify.svm.tolerance) << "\n";
  out << "bias = " << fmt(c.classify.svm.bias_feature) << "\n";

  out << "\n[nfis]\nk = " << c.nfis_k << "\n";

  const auto& e = c.embedding;
  out << "\n[embed]\n";
  out << "dim = " << e.dim << "\nmin_count = " << e.min_count << "\nnegatives = " << e.negatives
      << "\nepochs = " << e.epochs << "\nwindow = " << e.window << "\nalpha = " << fmt(e.alpha)
      << "\nmin_alpha = " << fmt(e.min_alpha) << "\nobjective_sample = " << e.objective_sample << "\n";

  const auto& t = c.project.tsne;
  out << "\n[project]\n";
  out << "sample_cap = " << c.project.sample_cap << "\nperplexity = " << fmt(t.perplexity)
      << "\nlearning_rate = " << fmt(t.learning_rate) << "\niterations = " << t.iterations
      << "\nexaggeration = " << fmt(t.exaggeration) << "\nexaggeration_iterations = " << t.exaggeration_iterations
      << "\ntheta = " << fmt(t.theta) << "\nexact_limit = " << t.exact_limit << "\n";

  const auto& v = c.verdict;
  out << "\n[verdict]\n";
  out << "subjective_max_f1 = " << fmt(v.subjective_max_f1) << "\nsubjective_min_imbalance = "
      << fmt(v.subjective_min_imbalance) << "\nsubjective_max_silhouette = " << fmt(v.subjective_max_silhouette)
      << "\nobjective_min_f1 = " << fmt(v.objective_min_f1) << "\nobjective_max_imbalance = "
      << fmt(v.objective_max_imbalance) << "\n";
}

}  // namespace subjaudit
