#include "subjaudit/groundtruth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "parallel.hpp"
#include "subjaudit/classify.hpp"
#include "subjaudit/error.hpp"
#include "subjaudit/rng.hpp"

namespace subjaudit {

namespace {

std::size_t draw_index(std::span<const double> probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return k;
  }
  // Rounding left u above the running sum: take the last nonzero entry.
  for (std::size_t k = probs.size(); k > 0; --k) {
    if (probs[k - 1] > 0.0) return k - 1;
  }
  return 0;
}

std::string pseudo_word(std::size_t index, int width) {
  std::string digits = std::to_string(index);
  if (static_cast<int>(digits.size()) < width) digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  return "w" + digits;
}

}  // namespace

LevelScale::LevelScale(std::vector<LevelBin> bins) : bins_(std::move(bins)) {
  if (bins_.empty()) throw InvalidArgument("LevelScale: no bins");
  if (bins_.front().lower != 0.0 || bins_.back().upper != 100.0) {
    throw InvalidArgument("LevelScale: bins must cover [0, 100]");
  }
  for (std::size_t i = 0; i < bins_.size(); ++i) {
    if (!(bins_[i].lower < bins_[i].upper)) throw InvalidArgument("LevelScale: empty bin " + bins_[i].name);
    if (i > 0 && bins_[i].lower != bins_[i - 1].upper) {
      throw InvalidArgument("LevelScale: gap or overlap before bin " + bins_[i].name);
    }
  }
}

std::vector<std::string> LevelScale::names() const {
  std::vector<std::string> out;
  for (const auto& b : bins_) out.push_back(b.name);
  return out;
}

const LevelScale& poverty_scale() {
  static const LevelScale scale({{0, 25, "Low Poverty"},
                                 {25, 50, "Moderate Poverty"},
                                 {50, 75, "High Poverty"},
                                 {75, 100, "Highest Poverty"}});
  return scale;
}

const std::string& map_rate_to_level(double rate, const LevelScale& scale) {
  if (!(rate >= 0.0 && rate <= 100.0)) {
    throw InvalidArgument("map_rate_to_level: rate " + std::to_string(rate) + " outside [0, 100]");
  }
  const auto& bins = scale.bins();
  for (const auto& b : bins) {
    if (rate >= b.lower && rate < b.upper) return b.name;
  }
  return bins.back().name;  // rate == 100
}

DenseMatrix truth_matrix(std::span<const std::string> row_labels, std::span<const std::string> column_labels,
                         const std::vector<std::string>& labels) {
  DenseMatrix m = confusion_matrix(row_labels, column_labels, labels).row_normalized();
  for (auto& x : m.data) x *= 100.0;
  return m;
}

void SynthSpec::validate() const {
  const std::size_t m = labels.size();
  if (m < 2) throw InvalidArgument("SynthSpec: need at least two labels");
  if (n_docs == 0) throw InvalidArgument("SynthSpec: n_docs must be positive");
  if (!priors.empty()) {
    if (priors.size() != m) throw InvalidArgument("SynthSpec: priors and labels differ in length");
    double s = 0.0;
    for (const double p : priors) {
      if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("SynthSpec: prior outside [0, 1]");
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-9) throw InvalidArgument("SynthSpec: priors do not sum to 1");
  }
  if (!(signal_strength >= 0.0 && signal_strength <= 1.0)) {
    throw InvalidArgument("SynthSpec: signal_strength outside [0, 1]");
  }
  if (corruption.rows != m || corruption.cols != m) throw InvalidArgument("SynthSpec: corruption must be M x M");
  for (std::size_t r = 0; r < m; ++r) {
    double s = 0.0;
    for (const double p : corruption.row(r)) {
      if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("SynthSpec: corruption probability outside [0, 1]");
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-9) {
      throw InvalidArgument("SynthSpec: corruption row " + labels[r] + " does not sum to 1");
    }
  }
  if (vocab_noise == 0 && signal_terms_per_label == 0) throw InvalidArgument("SynthSpec: empty vocabulary");
  if (noise_tokens > 0 && vocab_noise == 0) throw InvalidArgument("SynthSpec: noise tokens need vocab_noise > 0");
  if (target_class.empty()) throw InvalidArgument("SynthSpec: empty target class name");
}

SynthSpec objective_preset() {
  SynthSpec s;
  s.labels = {"Grades 3-5", "Grades 6-8", "Grades 9-12", "Grades PreK-2"};
  s.corruption = DenseMatrix(4, 4);
  for (std::size_t i = 0; i < 4; ++i) s.corruption(i, i) = 1.0;
  s.target_class = "grade_level";
  return s;
}

SynthSpec subjective_preset() {
  SynthSpec s;
  s.labels = {"Low Poverty", "Moderate Poverty", "High Poverty", "Highest Poverty"};
  s.priors = {0.60, 0.30, 0.07, 0.03};
  s.corruption = DenseMatrix(4, 4);
  s.corruption.data = {0.05, 0.10, 0.30, 0.55,  //
                       0.01, 0.07, 0.32, 0.60,  //
                       0.00, 0.02, 0.08, 0.90,  //
                       0.00, 0.00, 0.05, 0.95};
  s.target_class = "poverty_level";
  return s;
}

SynthSpec rating_preset() {
  SynthSpec s;
  s.labels = {"1", "2", "3", "4", "5"};
  s.priors = {0.10, 0.10, 0.15, 0.30, 0.35};
  s.corruption = DenseMatrix(5, 5);
  for (std::size_t i = 0; i < 5; ++i) {
    const bool edge = i == 0 || i == 4;
    s.corruption(i, i) = edge ? 0.8 : 0.6;
    if (i > 0) s.corruption(i, i - 1) = 0.2;
    if (i < 4) s.corruption(i, i + 1) = 0.2;
  }
  s.target_class = "rating";
  return s;
}

SynthSpec preset_by_name(std::string_view name) {
  if (name == "objective") return objective_preset();
  if (name == "subjective") return subjective_preset();
  if (name == "rating") return rating_preset();
  throw InvalidArgument("unknown synthetic preset '" + std::string(name) + "' (expected objective|subjective|rating)");
}

SyntheticCorpus generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  const std::size_t m = spec.labels.size();
  const std::vector<double> priors =
      spec.priors.empty() ? std::vector<double>(m, 1.0 / static_cast<double>(m)) : spec.priors;
  const std::size_t n_words = spec.vocab_noise + m * spec.signal_terms_per_label;
  const int width = std::max<int>(4, static_cast<int>(std::to_string(n_words - 1).size()));

  std::vector<Document> docs(spec.n_docs);
  std::vector<std::string> truth(spec.n_docs);
  detail::parallel_for(spec.n_docs, [&](std::size_t i) {
    Rng rng(mix_seed(spec.seed, i));
    const std::size_t t = draw_index(priors, rng);
    const std::size_t r = draw_index(spec.corruption.row(t), rng);
    std::vector<std::size_t> words;
    words.reserve(spec.noise_tokens + spec.signal_terms_per_label);
    for (std::size_t k = 0; k < spec.noise_tokens; ++k) words.push_back(rng.below(spec.vocab_noise));
    for (std::size_t j = 0; j < spec.signal_terms_per_label; ++j) {
      if (rng.uniform() < spec.signal_strength) {
        words.push_back(spec.vocab_noise + t * spec.signal_terms_per_label + j);
      }
    }
    rng.shuffle(std::span<std::size_t>(words));
    std::string text;
    for (const auto w : words) {
      if (!text.empty()) text += ' ';
      text += pseudo_word(w, width);
    }
    docs[i] = Document(std::to_string(i), std::move(text), {{spec.target_class, spec.labels[r]}});
    truth[i] = spec.labels[t];
  });
  return {LabeledCorpus(std::move(docs), {spec.target_class}), std::move(truth)};
}

}  // namespace subjaudit
