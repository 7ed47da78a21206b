#include "subjaudit/project.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

#include "csv.hpp"
#include "parallel.hpp"
#include "subjaudit/error.hpp"
#include "subjaudit/rng.hpp"

namespace subjaudit {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

void require_finite(const DenseMatrix& X, const char* what) {
  for (const double x : X.data) {
    if (!std::isfinite(x)) throw InvalidArgument(std::string(what) + ": non-finite input value");
  }
}

void require_2d(const DenseMatrix& P, const DenseMatrix& Y) {
  if (Y.cols != 2 || P.rows != Y.rows || P.cols != Y.rows) {
    throw InvalidArgument("P must be n x n and Y n x 2");
  }
}

// Unnormalized Student-t kernel sums per row, reduced in index order.
double kernel_normalizer(const DenseMatrix& Y) {
  const std::size_t n = Y.rows;
  std::vector<double> row_sum(n, 0.0);
  detail::parallel_for(n, [&](std::size_t i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) s += 1.0 / (1.0 + sq_dist(Y.row(i), Y.row(j)));
    }
    row_sum[i] = s;
  });
  return std::accumulate(row_sum.begin(), row_sum.end(), 0.0);
}

DenseMatrix exact_gradient(const DenseMatrix& P, const DenseMatrix& Y, double exaggeration) {
  const std::size_t n = Y.rows;
  const double z = kernel_normalizer(Y);
  DenseMatrix grad(n, 2);
  detail::parallel_for(n, [&](std::size_t i) {
    double gx = 0.0, gy = 0.0;
    const double yi0 = Y(i, 0), yi1 = Y(i, 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dx = yi0 - Y(j, 0);
      const double dy = yi1 - Y(j, 1);
      const double num = 1.0 / (1.0 + dx * dx + dy * dy);
      const double mult = (exaggeration * P(i, j) - num / z) * num;
      gx += mult * dx;
      gy += mult * dy;
    }
    grad(i, 0) = 4.0 * gx;
    grad(i, 1) = 4.0 * gy;
  });
  return grad;
}

DenseMatrix initial_layout(std::size_t n, std::uint64_t seed) {
  DenseMatrix Y(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(mix_seed(seed, i));
    Y(i, 0) = 1e-4 * rng.normal();
    Y(i, 1) = 1e-4 * rng.normal();
  }
  return Y;
}

void center(DenseMatrix& Y) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < Y.rows; ++i) {
    mx += Y(i, 0);
    my += Y(i, 1);
  }
  mx /= static_cast<double>(Y.rows);
  my /= static_cast<double>(Y.rows);
  for (std::size_t i = 0; i < Y.rows; ++i) {
    Y(i, 0) -= mx;
    Y(i, 1) -= my;
  }
}

}  // namespace

ConditionalRow conditional_distribution(std::span<const double> sq_distances, double perplexity, double tolerance,
                                        int max_steps) {
  if (sq_distances.empty()) throw InvalidArgument("conditional_distribution: no neighbours");
  if (!(perplexity > 0.0)) throw InvalidArgument("conditional_distribution: perplexity must be positive");
  const std::size_t m = sq_distances.size();
  std::vector<double> d(m);
  for (std::size_t j = 0; j < m; ++j) d[j] = std::max(sq_distances[j], kDistanceFloor);
  // Shifting by the smallest distance leaves p and the entropy unchanged
  // and keeps exp() away from underflow.
  // The starting bandwidth uses the unshifted scale so that near-equal
  // distances do not start the search at an enormous beta.
  const double mean_d = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(m);
  const double d_min = *std::min_element(d.begin(), d.end());
  for (auto& x : d) x -= d_min;

  const double target = std::log2(perplexity);
  ConditionalRow row;
  row.p.resize(m);
  row.beta = mean_d > 0.0 ? 1.0 / mean_d : 1.0;
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  for (int step = 0;; ++step) {
    double sum = 0.0, weighted = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      row.p[j] = std::exp(-row.beta * d[j]);
      sum += row.p[j];
      weighted += d[j] * row.p[j];
    }
    // H (nats) = ln(sum) + beta * E[d]
    row.entropy_bits = (std::log(sum) + row.beta * weighted / sum) / std::log(2.0);
    for (auto& p : row.p) p /= sum;
    const double diff = row.entropy_bits - target;
    if (std::abs(diff) < tolerance || step + 1 >= max_steps) break;
    if (diff > 0.0) {
      lo = row.beta;
      row.beta = std::isinf(hi) ? row.beta * 2.0 : 0.5 * (row.beta + hi);
    } else {
      hi = row.beta;
      row.beta = 0.5 * (row.beta + lo);
    }
  }
  return row;
}

AffinityMatrix conditional_affinities(const DenseMatrix& X, double perplexity) {
  const std::size_t n = X.rows;
  if (n < 3) throw InvalidArgument("conditional_affinities: need at least 3 points");
  if (!(perplexity >= 2.0) || !(perplexity < static_cast<double>(n))) {
    throw InvalidArgument("conditional_affinities: perplexity must satisfy 2 <= perplexity < n");
  }
  require_finite(X, "conditional_affinities");

  AffinityMatrix out;
  out.perplexity = perplexity;
  out.sigmas.resize(n);
  out.entropies.resize(n);
  DenseMatrix cond(n, n);
  detail::parallel_for(n, [&](std::size_t i) {
    std::vector<double> d;
    d.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) d.push_back(sq_dist(X.row(i), X.row(j)));
    }
    const auto row = conditional_distribution(d, perplexity);
    std::size_t k = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) cond(i, j) = row.p[k++];
    }
    out.sigmas[i] = std::sqrt(1.0 / (2.0 * row.beta));
    out.entropies[i] = row.entropy_bits;
  });

  out.P = DenseMatrix(n, n);
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = (cond(i, j) + cond(j, i)) * scale;
      out.P(i, j) = v;
      out.P(j, i) = v;
    }
  }
  return out;
}

double kl_divergence(const DenseMatrix& P, const DenseMatrix& Y) {
  require_2d(P, Y);
  const std::size_t n = Y.rows;
  const double z = kernel_normalizer(Y);
  std::vector<double> row_kl(n, 0.0);
  detail::parallel_for(n, [&](std::size_t i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double p = P(i, j);
      if (j == i || p <= 0.0) continue;
      const double q = 1.0 / (1.0 + sq_dist(Y.row(i), Y.row(j))) / z;
      s += p * std::log(p / q);
    }
    row_kl[i] = s;
  });
  return std::accumulate(row_kl.begin(), row_kl.end(), 0.0);
}

DenseMatrix kl_gradient(const DenseMatrix& P, const DenseMatrix& Y) {
  require_2d(P, Y);
  return exact_gradient(P, Y, 1.0);
}

Projection2D tsne(const DenseMatrix& X, const TsneOptions& options, const std::optional<DenseMatrix>& initial) {
  const std::size_t n = X.rows;
  if (options.iterations < 0) throw InvalidArgument("tsne: iterations must be >= 0");
  if (!(options.learning_rate > 0.0)) throw InvalidArgument("tsne: learning rate must be positive");
  if (options.kl_every < 1) throw InvalidArgument("tsne: kl_every must be >= 1");
  require_finite(X, "tsne");

  Projection2D out;
  out.options = options;
  out.barnes_hut = n > options.exact_limit;

  DenseMatrix exact_P;
  detail::SparseAffinity sparse_P;
  if (out.barnes_hut) {
    if (n < 3 || !(options.perplexity >= 2.0) || !(options.perplexity < static_cast<double>(n))) {
      throw InvalidArgument("tsne: perplexity must satisfy 2 <= perplexity < n");
    }
    sparse_P = detail::knn_affinities(X, options.perplexity);
  } else {
    exact_P = conditional_affinities(X, options.perplexity).P;
  }

  DenseMatrix Y;
  if (initial) {
    if (initial->rows != n || initial->cols != 2) throw InvalidArgument("tsne: initial layout must be n x 2");
    require_finite(*initial, "tsne");
    Y = *initial;
  } else {
    Y = initial_layout(n, options.seed);
  }

  DenseMatrix update(n, 2, 0.0);
  DenseMatrix gains(n, 2, 1.0);
  double last_z = 0.0;
  const auto current_kl = [&] {
    if (!out.barnes_hut) return kl_divergence(exact_P, Y);
    double z = 0.0;
    detail::bh_gradient(sparse_P, Y, 1.0, options.theta, &z);
    return detail::bh_kl(sparse_P, Y, z);
  };

  for (int it = 0; it < options.iterations; ++it) {
    const double exaggeration = it < options.exaggeration_iterations ? options.exaggeration : 1.0;
    const double momentum = it < options.momentum_switch ? options.initial_momentum : options.final_momentum;
    const DenseMatrix grad = out.barnes_hut
                                 ? detail::bh_gradient(sparse_P, Y, exaggeration, options.theta, &last_z)
                                 : exact_gradient(exact_P, Y, exaggeration);
    for (std::size_t k = 0; k < Y.data.size(); ++k) {
      const bool same_sign = (grad.data[k] > 0.0) == (update.data[k] > 0.0);
      gains.data[k] = same_sign ? std::max(gains.data[k] * 0.8, 0.01) : gains.data[k] + 0.2;
      update.data[k] = momentum * update.data[k] - options.learning_rate * gains.data[k] * grad.data[k];
      Y.data[k] += update.data[k];
    }
    center(Y);

    const int done = it + 1;
    if (done >= options.exaggeration_iterations && (done - options.exaggeration_iterations) % options.kl_every == 0) {
      out.kl_trace.emplace_back(done, current_kl());
    }
  }

  if (n > 0) {
    if (out.kl_trace.empty() || out.kl_trace.back().first != options.iterations) {
      out.kl_trace.emplace_back(options.iterations, current_kl());
    }
    out.final_kl = std::max(0.0, out.kl_trace.back().second);
  }
  out.coordinates = std::move(Y);
  return out;
}

Silhouette silhouette(const DenseMatrix& Y, std::span<const std::string> labels) {
  const std::size_t n = Y.rows;
  if (labels.size() != n) throw InvalidArgument("silhouette: labels and points differ in length");
  std::map<std::string, std::size_t> index;
  for (const auto& l : labels) index.emplace(l, 0);
  if (index.size() < 2) throw InvalidArgument("silhouette: need at least two distinct labels");
  std::size_t next = 0;
  for (auto& [l, i] : index) i = next++;
  const std::size_t m = index.size();
  std::vector<std::size_t> y(n);
  std::vector<std::size_t> sizes(m, 0);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = index[labels[i]];
    ++sizes[y[i]];
  }

  std::vector<double> s(n, 0.0);
  detail::parallel_for(n, [&](std::size_t i) {
    if (sizes[y[i]] < 2) return;
    std::vector<double> sum(m, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sum[y[j]] += std::sqrt(sq_dist(Y.row(i), Y.row(j)));
    }
    const double a = sum[y[i]] / static_cast<double>(sizes[y[i]] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < m; ++c) {
      if (c != y[i]) b = std::min(b, sum[c] / static_cast<double>(sizes[c]));
    }
    const double denom = std::max(a, b);
    s[i] = denom > 0.0 ? (b - a) / denom : 0.0;
  });

  Silhouette out;
  out.overall = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(n);
  std::vector<double> per(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) per[y[i]] += s[i];
  for (const auto& [l, c] : index) out.per_label.emplace_back(l, per[c] / static_cast<double>(sizes[c]));
  return out;
}

void write_projection_csv(const std::filesystem::path& path, std::span<const std::string> ids,
                          std::span<const std::string> labels, const DenseMatrix& Y) {
  if (Y.cols != 2 || ids.size() != Y.rows || labels.size() != Y.rows) {
    throw InvalidArgument("write_projection_csv: ids, labels and coordinates differ in length");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write projection: " + path.string());
  out << "id,label,x,y\n";
  char buf[64];
  for (std::size_t i = 0; i < Y.rows; ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g", Y(i, 0), Y(i, 1));
    out << detail::csv_field(ids[i]) << ',' << detail::csv_field(labels[i]) << ',' << buf << '\n';
  }
  if (!out) throw IoError("failed writing projection: " + path.string());
}

}  // namespace subjaudit
