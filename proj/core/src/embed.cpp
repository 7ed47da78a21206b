#include "subjaudit/embed.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include "csv.hpp"
#include "subjaudit/error.hpp"
#include "subjaudit/vectorize.hpp"

namespace subjaudit {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(sigmoid(x)) without overflow.
double log_sigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// dL/d(v.u_j) for the target (j = 0) and each negative; shared by the
// public gradient and the training loop.
struct PairCoefficients {
  double loss = 0.0;
  double target = 0.0;
  std::vector<double> negatives;
};

PairCoefficients pair_coefficients(std::span<const double> v, std::span<const double> target,
                                   std::span<const std::span<const double>> negatives) {
  PairCoefficients pc;
  const double f = dot(v, target);
  pc.loss = -log_sigmoid(f);
  pc.target = sigmoid(f) - 1.0;
  pc.negatives.reserve(negatives.size());
  for (const auto u : negatives) {
    const double g = dot(v, u);
    pc.loss -= log_sigmoid(-g);
    pc.negatives.push_back(sigmoid(g));
  }
  return pc;
}

struct Encoded {
  std::vector<std::string> words;
  std::vector<std::uint64_t> counts;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::vector<std::uint32_t>> docs;
};

Encoded encode(std::span<const std::string> texts, std::size_t min_count) {
  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(texts.size());
  std::unordered_map<std::string, std::uint64_t> freq;
  for (const auto& text : texts) {
    tokens.push_back(tokenize(text));
    for (const auto& t : tokens.back()) ++freq[t];
  }
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (auto& [w, c] : freq) {
    if (c >= min_count) kept.emplace_back(w, c);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  Encoded enc;
  for (auto& [w, c] : kept) {
    enc.index.emplace(w, enc.words.size());
    enc.words.push_back(std::move(w));
    enc.counts.push_back(c);
  }
  for (const auto& toks : tokens) {
    std::vector<std::uint32_t> ids;
    for (const auto& t : toks) {
      if (const auto it = enc.index.find(t); it != enc.index.end()) {
        ids.push_back(static_cast<std::uint32_t>(it->second));
      }
    }
    enc.docs.push_back(std::move(ids));
  }
  return enc;
}

// One SGD step on (doc vector, target word) with `negs` negatives. Word
// vectors are updated unless `freeze_words`.
double sgd_step(std::span<double> v, DenseMatrix& word_vectors, std::size_t target,
                std::span<const std::size_t> negs, double lr, bool freeze_words, std::vector<double>& grad_v) {
  std::vector<std::span<const double>> neg_rows;
  neg_rows.reserve(negs.size());
  for (const auto n : negs) neg_rows.push_back(std::as_const(word_vectors).row(n));
  const auto pc = pair_coefficients(v, std::as_const(word_vectors).row(target), neg_rows);

  std::fill(grad_v.begin(), grad_v.end(), 0.0);
  const auto accumulate = [&](std::size_t word, double coef) {
    auto u = word_vectors.row(word);
    for (std::size_t i = 0; i < v.size(); ++i) grad_v[i] += coef * u[i];
  };
  accumulate(target, pc.target);
  for (std::size_t k = 0; k < negs.size(); ++k) accumulate(negs[k], pc.negatives[k]);

  if (!freeze_words) {
    const auto update = [&](std::size_t word, double coef) {
      auto u = word_vectors.row(word);
      for (std::size_t i = 0; i < v.size(); ++i) u[i] -= lr * coef * v[i];
    };
    update(target, pc.target);
    for (std::size_t k = 0; k < negs.size(); ++k) update(negs[k], pc.negatives[k]);
  }
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= lr * grad_v[i];
  return pc.loss;
}

void draw_negatives(const NegativeSampler& sampler, Rng& rng, std::size_t target, std::size_t k,
                    std::vector<std::size_t>& out) {
  out.clear();
  if (sampler.size() < 2) return;
  while (out.size() < k) {
    const auto w = sampler.draw(rng);
    if (w != target) out.push_back(w);
  }
}

struct ObjectiveBatch {
  std::vector<std::size_t> doc;
  std::vector<std::size_t> target;
  std::vector<std::vector<std::size_t>> negatives;
};

double batch_objective(const ObjectiveBatch& batch, const DenseMatrix& doc_vectors,
                       const DenseMatrix& word_vectors) {
  if (batch.doc.empty()) return 0.0;
  double total = 0.0;
  std::vector<std::span<const double>> neg_rows;
  for (std::size_t s = 0; s < batch.doc.size(); ++s) {
    neg_rows.clear();
    for (const auto n : batch.negatives[s]) neg_rows.push_back(word_vectors.row(n));
    total += pair_coefficients(doc_vectors.row(batch.doc[s]), word_vectors.row(batch.target[s]), neg_rows).loss;
  }
  return total / static_cast<double>(batch.doc.size());
}

void init_doc_vector(std::span<double> v, Rng& rng) {
  const double half = 0.5 / static_cast<double>(v.size());
  for (auto& x : v) x = rng.uniform(-half, half);
}

// Binary I/O helpers.
template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}
template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw IoError("truncated embedding model file");
  return value;
}
void put_string(std::ostream& out, const std::string& s) {
  put<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}
std::string get_string(std::istream& in) {
  const auto n = get<std::uint64_t>(in);
  if (n > (1ULL << 32)) throw IoError("corrupt string length in embedding model file");
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw IoError("truncated embedding model file");
  return s;
}
void put_matrix(std::ostream& out, const DenseMatrix& m) {
  put<std::uint64_t>(out, m.rows);
  put<std::uint64_t>(out, m.cols);
  for (const double x : m.data) put<double>(out, x);
}
DenseMatrix get_matrix(std::istream& in) {
  const auto rows = get<std::uint64_t>(in);
  const auto cols = get<std::uint64_t>(in);
  if (cols != 0 && rows > (1ULL << 40) / cols) throw IoError("corrupt matrix shape in embedding model file");
  DenseMatrix m(rows, cols);
  for (auto& x : m.data) x = get<double>(in);
  return m;
}

constexpr char kMagic[8] = {'S', 'J', 'P', 'V', 'D', 'B', 'O', 'W'};

}  // namespace

NegativeSampler::NegativeSampler(std::span<const std::uint64_t> counts, double power) {
  cdf_.reserve(counts.size());
  double total = 0.0;
  for (const auto c : counts) {
    total += std::pow(static_cast<double>(c), power);
    cdf_.push_back(total);
  }
  if (total > 0.0) {
    for (auto& x : cdf_) x /= total;
    cdf_.back() = 1.0;
  }
}

std::size_t NegativeSampler::draw(Rng& rng) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
}

double NegativeSampler::probability(std::size_t word) const {
  return word == 0 ? cdf_[0] : cdf_[word] - cdf_[word - 1];
}

PairGradient sg_neg_gradient(std::span<const double> doc_vector, std::span<const double> target,
                             std::span<const std::span<const double>> negatives, double scale) {
  const std::size_t d = doc_vector.size();
  if (target.size() != d) throw InvalidArgument("sg_neg_gradient: dimension mismatch");
  for (const auto u : negatives) {
    if (u.size() != d) throw InvalidArgument("sg_neg_gradient: dimension mismatch");
  }
  const auto pc = pair_coefficients(doc_vector, target, negatives);

  PairGradient g;
  g.loss = scale * pc.loss;
  g.doc.assign(d, 0.0);
  g.target.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    g.doc[i] += scale * pc.target * target[i];
    g.target[i] = scale * pc.target * doc_vector[i];
  }
  for (std::size_t k = 0; k < negatives.size(); ++k) {
    std::vector<double> gn(d);
    for (std::size_t i = 0; i < d; ++i) {
      g.doc[i] += scale * pc.negatives[k] * negatives[k][i];
      gn[i] = scale * pc.negatives[k] * doc_vector[i];
    }
    g.negatives.push_back(std::move(gn));
  }
  return g;
}

EmbeddingModel::EmbeddingModel(EmbeddingOptions options, std::vector<std::string> doc_ids, DenseMatrix doc_vectors,
                               std::vector<std::string> words, std::vector<std::uint64_t> word_counts,
                               DenseMatrix word_vectors, std::vector<double> objective_trace)
    : options_(options), doc_ids_(std::move(doc_ids)), doc_vectors_(std::move(doc_vectors)),
      words_(std::move(words)), word_counts_(std::move(word_counts)), word_vectors_(std::move(word_vectors)),
      objective_trace_(std::move(objective_trace)), sampler_(word_counts_) {
  if (doc_vectors_.rows != doc_ids_.size() || doc_vectors_.cols != options_.dim ||
      word_vectors_.rows != words_.size() || word_vectors_.cols != options_.dim ||
      word_counts_.size() != words_.size()) {
    throw InvalidArgument("EmbeddingModel: inconsistent dimensions");
  }
  for (std::size_t i = 0; i < words_.size(); ++i) index_.emplace(words_[i], i);
}

std::optional<std::size_t> EmbeddingModel::word_index(std::string_view word) const {
  const auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool EmbeddingModel::operator==(const EmbeddingModel& o) const {
  const auto& a = options_;
  const auto& b = o.options_;
  return a.dim == b.dim && a.min_count == b.min_count && a.negatives == b.negatives && a.epochs == b.epochs &&
         a.window == b.window && a.alpha == b.alpha && a.min_alpha == b.min_alpha && a.seed == b.seed &&
         a.objective_sample == b.objective_sample && doc_ids_ == o.doc_ids_ && doc_vectors_ == o.doc_vectors_ &&
         words_ == o.words_ && word_counts_ == o.word_counts_ && word_vectors_ == o.word_vectors_ &&
         objective_trace_ == o.objective_trace_;
}

void EmbeddingModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write embedding model: " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, 1);
  put<std::uint64_t>(out, options_.dim);
  put<std::uint64_t>(out, options_.min_count);
  put<std::uint64_t>(out, options_.negatives);
  put<std::int64_t>(out, options_.epochs);
  put<std::uint64_t>(out, options_.window);
  put<double>(out, options_.alpha);
  put<double>(out, options_.min_alpha);
  put<std::uint64_t>(out, options_.seed);
  put<std::uint64_t>(out, options_.objective_sample);
  put<std::uint64_t>(out, doc_ids_.size());
  for (const auto& id : doc_ids_) put_string(out, id);
  put_matrix(out, doc_vectors_);
  put<std::uint64_t>(out, words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    put_string(out, words_[i]);
    put<std::uint64_t>(out, word_counts_[i]);
  }
  put_matrix(out, word_vectors_);
  put<std::uint64_t>(out, objective_trace_.size());
  for (const double x : objective_trace_) put<double>(out, x);
  if (!out) throw IoError("failed writing embedding model: " + path.string());
}

EmbeddingModel EmbeddingModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embedding model: " + path.string());
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0 || get<std::uint32_t>(in) != 1) {
    throw IoError("not a subjaudit PV-DBOW model: " + path.string());
  }
  EmbeddingOptions opt;
  opt.dim = get<std::uint64_t>(in);
  opt.min_count = get<std::uint64_t>(in);
  opt.negatives = get<std::uint64_t>(in);
  opt.epochs = static_cast<int>(get<std::int64_t>(in));
  opt.window = get<std::uint64_t>(in);
  opt.alpha = get<double>(in);
  opt.min_alpha = get<double>(in);
  opt.seed = get<std::uint64_t>(in);
  opt.objective_sample = get<std::uint64_t>(in);
  std::vector<std::string> ids(get<std::uint64_t>(in));
  for (auto& id : ids) id = get_string(in);
  auto doc_vectors = get_matrix(in);
  const auto n_words = get<std::uint64_t>(in);
  std::vector<std::string> words;
  std::vector<std::uint64_t> counts;
  for (std::uint64_t i = 0; i < n_words; ++i) {
    words.push_back(get_string(in));
    counts.push_back(get<std::uint64_t>(in));
  }
  auto word_vectors = get_matrix(in);
  std::vector<double> trace(get<std::uint64_t>(in));
  for (auto& x : trace) x = get<double>(in);
  return EmbeddingModel(opt, std::move(ids), std::move(doc_vectors), std::move(words), std::move(counts),
                        std::move(word_vectors), std::move(trace));
}

EmbeddingModel train_pvdbow(std::span<const std::string> ids, std::span<const std::string> texts,
                            const EmbeddingOptions& options) {
  if (texts.empty()) throw InvalidArgument("train_pvdbow: empty corpus");
  if (ids.size() != texts.size()) throw InvalidArgument("train_pvdbow: ids and texts differ in length");
  if (options.dim < 1) throw InvalidArgument("train_pvdbow: dim must be >= 1");
  if (options.negatives < 1) throw InvalidArgument("train_pvdbow: negatives must be >= 1");
  if (options.epochs < 0) throw InvalidArgument("train_pvdbow: epochs must be >= 0");

  auto enc = encode(texts, options.min_count);
  if (enc.words.empty()) throw InvalidArgument("train_pvdbow: vocabulary is empty after min_count pruning");

  const std::size_t dim = options.dim;
  const NegativeSampler sampler(enc.counts);
  DenseMatrix doc_vectors(texts.size(), dim);
  DenseMatrix word_vectors(enc.words.size(), dim, 0.0);
  Rng rng(options.seed);
  for (std::size_t d = 0; d < texts.size(); ++d) init_doc_vector(doc_vectors.row(d), rng);

  // Fixed batch for tracking the objective.
  ObjectiveBatch batch;
  {
    Rng batch_rng(mix_seed(options.seed, 0xB47C));
    std::vector<std::size_t> nonempty;
    for (std::size_t d = 0; d < enc.docs.size(); ++d) {
      if (!enc.docs[d].empty()) nonempty.push_back(d);
    }
    for (std::size_t s = 0; s < options.objective_sample && !nonempty.empty(); ++s) {
      const auto d = nonempty[batch_rng.below(nonempty.size())];
      const auto w = enc.docs[d][batch_rng.below(enc.docs[d].size())];
      std::vector<std::size_t> negs;
      draw_negatives(sampler, batch_rng, w, options.negatives, negs);
      batch.doc.push_back(d);
      batch.target.push_back(w);
      batch.negatives.push_back(std::move(negs));
    }
  }

  std::vector<double> trace{batch_objective(batch, doc_vectors, word_vectors)};

  std::size_t words_per_epoch = 0;
  for (const auto& doc : enc.docs) words_per_epoch += doc.size();
  const double total_steps = static_cast<double>(words_per_epoch) * options.epochs;

  std::vector<std::size_t> order(texts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<std::size_t> negs;
  std::vector<double> grad_v(dim);
  std::size_t step = 0;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (const auto d : order) {
      auto v = doc_vectors.row(d);
      for (const auto w : enc.docs[d]) {
        const double progress = total_steps > 0 ? static_cast<double>(step) / total_steps : 0.0;
        const double lr = std::max(options.min_alpha, options.alpha - (options.alpha - options.min_alpha) * progress);
        draw_negatives(sampler, rng, w, options.negatives, negs);
        sgd_step(v, word_vectors, w, negs, lr, false, grad_v);
        ++step;
      }
    }
    trace.push_back(batch_objective(batch, doc_vectors, word_vectors));
  }

  return EmbeddingModel(options, std::vector<std::string>(ids.begin(), ids.end()), std::move(doc_vectors),
                        std::move(enc.words), std::move(enc.counts), std::move(word_vectors), std::move(trace));
}

EmbeddingModel train_pvdbow(const LabeledCorpus& corpus, const EmbeddingOptions& options) {
  std::vector<std::string> ids;
  ids.reserve(corpus.size());
  for (const auto& doc : corpus.documents()) ids.push_back(doc.id);
  const auto texts = corpus.texts();
  return train_pvdbow(ids, texts, options);
}

InferredVector infer_vector(const EmbeddingModel& model, std::string_view text, int steps, std::uint64_t seed) {
  InferredVector out;
  out.values.assign(model.dim(), 0.0);
  std::vector<std::size_t> words;
  for (const auto& t : tokenize(text)) {
    if (const auto w = model.word_index(t)) words.push_back(*w);
  }
  if (words.empty()) {
    out.all_oov = true;
    return out;
  }
  Rng rng(seed);
  init_doc_vector(out.values, rng);

  // Word vectors are frozen; sgd_step only reads them when freeze_words is set.
  auto& word_vectors = const_cast<DenseMatrix&>(model.word_vectors());
  const auto& opt = model.options();
  const double total = static_cast<double>(words.size()) * std::max(steps, 0);
  std::vector<std::size_t> negs;
  std::vector<double> grad_v(model.dim());
  std::size_t step = 0;
  for (int pass = 0; pass < steps; ++pass) {
    for (const auto w : words) {
      const double lr = std::max(opt.min_alpha, opt.alpha - (opt.alpha - opt.min_alpha) * (static_cast<double>(step) / total));
      draw_negatives(model.sampler(), rng, w, opt.negatives, negs);
      sgd_step(out.values, word_vectors, w, negs, lr, true, grad_v);
      ++step;
    }
  }
  return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("cosine_similarity: dimension mismatch");
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

void write_embeddings_csv(const std::filesystem::path& path, std::span<const std::string> ids,
                          std::span<const std::string> labels, const DenseMatrix& vectors) {
  if (ids.size() != vectors.rows || (!labels.empty() && labels.size() != ids.size())) {
    throw InvalidArgument("write_embeddings_csv: ids, labels and vectors differ in length");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write embeddings: " + path.string());
  out << "id";
  if (!labels.empty()) out << ",label";
  for (std::size_t j = 0; j < vectors.cols; ++j) out << ",d" << j;
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out << detail::csv_field(ids[i]);
    if (!labels.empty()) out << ',' << detail::csv_field(labels[i]);
    for (const double x : vectors.row(i)) {
      std::snprintf(buf, sizeof(buf), "%.17g", x);
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing embeddings: " + path.string());
}

EmbeddingTable read_embeddings_csv(const std::filesystem::path& path) {
  const auto rows = detail::parse_csv_rows(detail::read_text_file(path), path);
  if (rows.empty() || rows[0].empty() || rows[0][0] != "id") throw IoError("not an embeddings CSV: " + path.string());
  const bool has_label = rows[0].size() > 1 && rows[0][1] == "label";
  const std::size_t first = has_label ? 2 : 1;
  const std::size_t dim = rows[0].size() - first;
  EmbeddingTable table;
  table.vectors = DenseMatrix(rows.size() - 1, dim);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != rows[0].size()) throw IoError(path.string() + ": ragged embeddings row " + std::to_string(r));
    table.ids.push_back(rows[r][0]);
    if (has_label) table.labels.push_back(rows[r][1]);
    for (std::size_t j = 0; j < dim; ++j) {
      try {
        table.vectors(r - 1, j) = std::stod(rows[r][first + j]);
      } catch (const std::exception&) {
        throw IoError(path.string() + ": non-numeric value in row " + std::to_string(r));
      }
    }
  }
  return table;
}

}  // namespace subjaudit
