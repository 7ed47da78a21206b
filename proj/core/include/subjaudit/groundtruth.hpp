#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "subjaudit/corpus.hpp"
#include "subjaudit/dense.hpp"

namespace subjaudit {

struct LevelBin {
  double lower = 0.0;  // inclusive
  double upper = 0.0;  // exclusive, except for the last bin
  std::string name;
};

/// Ordered bins tiling [0, 100].
class LevelScale {
 public:
  LevelScale() = default;
  /// Throws InvalidArgument unless the bins start at 0, end at 100 and
  /// each bin starts where the previous one ends.
  explicit LevelScale(std::vector<LevelBin> bins);

  const std::vector<LevelBin>& bins() const { return bins_; }
  std::vector<std::string> names() const;

 private:
  std::vector<LevelBin> bins_;
};

/// Low [0,25), Moderate [25,50), High [50,75), Highest [75,100].
const LevelScale& poverty_scale();

/// Bin containing `rate`; throws InvalidArgument outside [0, 100].
const std::string& map_rate_to_level(double rate, const LevelScale& scale = poverty_scale());

/// Percentages with rows = `row_labels` values and columns = `column_labels`
/// values, each nonzero row summing to 100. Throws InvalidArgument on length
/// mismatch or unknown labels.
DenseMatrix truth_matrix(std::span<const std::string> row_labels, std::span<const std::string> column_labels,
                         const std::vector<std::string>& labels);

struct SynthSpec {
  std::size_t n_docs = 5000;
  std::vector<std::string> labels;
  /// True-label prior; empty means uniform.
  std::vector<double> priors;
  std::size_t signal_terms_per_label = 5;
  /// Probability that each of the true label's signal terms appears.
  double signal_strength = 0.8;
  /// Row t is the distribution of the reported label given true label t.
  DenseMatrix corruption;
  /// Number of background pseudo-words.
  std::size_t vocab_noise = 2000;
  /// Background tokens per document, drawn uniformly from the noise words.
  std::size_t noise_tokens = 60;
  std::string target_class = "label";
  std::uint64_t seed = 1;

  /// Throws InvalidArgument when a probability is out of range, a row does
  /// not sum to 1 (within 1e-9) or shapes disagree.
  void validate() const;
};

/// Identity corruption over four grade bands with uniform priors.
SynthSpec objective_preset();
/// Four poverty levels, most documents truly low or moderate and mostly
/// reported as high or highest.
SynthSpec subjective_preset();
/// Five star ratings confused with their neighbours.
SynthSpec rating_preset();
/// "objective", "subjective" or "rating".
SynthSpec preset_by_name(std::string_view name);

struct SyntheticCorpus {
  /// Documents labeled with the reported label under spec.target_class.
  LabeledCorpus corpus;
  std::vector<std::string> true_labels;
};

/// Each document uses its own random stream keyed by (seed, index).
/// Pseudo-words are "w" followed by a zero-padded index; signal words follow
/// the noise words.
SyntheticCorpus generate_synthetic(const SynthSpec& spec);

}  // namespace subjaudit
