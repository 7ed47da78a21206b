#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "subjaudit/dense.hpp"

namespace subjaudit {

/// Squared distances below this are clamped, so duplicate points keep a
/// finite bandwidth.
inline constexpr double kDistanceFloor = 1e-12;

struct ConditionalRow {
  /// p_{j|i} over the supplied neighbours, summing to 1.
  std::vector<double> p;
  /// Precision 1 / (2 sigma^2) of the Gaussian kernel.
  double beta = 1.0;
  /// Shannon entropy of `p` in bits.
  double entropy_bits = 0.0;
};

/// Bisects the Gaussian precision until the entropy of p_{j|i} is within
/// `tolerance` bits of log2(perplexity), for at most `max_steps` steps.
/// `sq_distances` excludes the point itself.
ConditionalRow conditional_distribution(std::span<const double> sq_distances, double perplexity,
                                        double tolerance = 1e-5, int max_steps = 50);

struct AffinityMatrix {
  /// Symmetric joint probabilities (p_{j|i} + p_{i|j}) / 2n, zero diagonal.
  DenseMatrix P;
  double perplexity = 0.0;
  /// Per-point Gaussian bandwidth sigma_i.
  std::vector<double> sigmas;
  /// Achieved entropy of each conditional row in bits.
  std::vector<double> entropies;
};

/// Throws InvalidArgument unless there are at least 3 points and
/// 2 <= perplexity < n.
AffinityMatrix conditional_affinities(const DenseMatrix& X, double perplexity);

/// KL(P || Q) with Student-t Q on the 2-D coordinates Y; zero P cells
/// contribute nothing.
double kl_divergence(const DenseMatrix& P, const DenseMatrix& Y);

/// 4 sum_j (p_ij - q_ij)(y_i - y_j) / (1 + |y_i - y_j|^2), row-parallel with a
/// fixed reduction order.
DenseMatrix kl_gradient(const DenseMatrix& P, const DenseMatrix& Y);

struct TsneOptions {
  double perplexity = 30.0;
  double learning_rate = 200.0;
  int iterations = 1000;
  double exaggeration = 12.0;
  int exaggeration_iterations = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  int momentum_switch = 250;
  /// Barnes-Hut opening angle, used only above `exact_limit` points.
  double theta = 0.5;
  std::size_t exact_limit = 5000;
  /// Spacing of the KL trace once exaggeration has ended.
  int kl_every = 50;
  std::uint64_t seed = 1;
};

struct Projection2D {
  /// n x 2.
  DenseMatrix coordinates;
  /// KL without exaggeration at the last iteration.
  double final_kl = 0.0;
  /// (iteration, KL) pairs every `kl_every` iterations from the end of
  /// exaggeration, plus the final iteration.
  std::vector<std::pair<int, double>> kl_trace;
  TsneOptions options;
  bool barnes_hut = false;
};

/// Gradient descent with momentum, early exaggeration and per-coordinate
/// gains. `initial` (n x 2) replaces the seeded N(0, 1e-4^2) start.
Projection2D tsne(const DenseMatrix& X, const TsneOptions& options,
                  const std::optional<DenseMatrix>& initial = std::nullopt);

struct Silhouette {
  double overall = 0.0;
  /// Mean silhouette of each label's members, in sorted label order.
  std::vector<std::pair<std::string, double>> per_label;
};

/// Euclidean silhouette of `labels` on the rows of Y. Members of a
/// singleton label score 0. Throws InvalidArgument with fewer than two
/// distinct labels.
Silhouette silhouette(const DenseMatrix& Y, std::span<const std::string> labels);

/// CSV `id,label,x,y`.
void write_projection_csv(const std::filesystem::path& path, std::span<const std::string> ids,
                          std::span<const std::string> labels, const DenseMatrix& Y);

namespace detail {

/// Sparse symmetric affinities over `k` nearest neighbours for Barnes-Hut.
struct SparseAffinity {
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> columns;
  std::vector<double> values;
};

SparseAffinity knn_affinities(const DenseMatrix& X, double perplexity);

/// Barnes-Hut approximation of the KL gradient; returns the estimated
/// normalizer Z alongside through `z_out`.
DenseMatrix bh_gradient(const SparseAffinity& P, const DenseMatrix& Y, double exaggeration, double theta,
                        double* z_out);

double bh_kl(const SparseAffinity& P, const DenseMatrix& Y, double z);

}  // namespace detail

}  // namespace subjaudit
