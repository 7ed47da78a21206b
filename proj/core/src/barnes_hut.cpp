#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "parallel.hpp"
#include "subjaudit/error.hpp"
#include "subjaudit/project.hpp"

namespace subjaudit::detail {

namespace {

struct Node {
  double cx = 0.0, cy = 0.0, half = 0.0;  // cell center and half-width
  double mx = 0.0, my = 0.0;              // center of mass
  std::size_t count = 0;
  int child = -1;                         // index of first of four children
  std::vector<std::uint32_t> points;      // leaf contents
};

constexpr int kMaxDepth = 48;

class QuadTree {
 public:
  explicit QuadTree(const DenseMatrix& Y) : Y_(Y) {
    double x0 = Y(0, 0), x1 = x0, y0 = Y(0, 1), y1 = y0;
    for (std::size_t i = 1; i < Y.rows; ++i) {
      x0 = std::min(x0, Y(i, 0));
      x1 = std::max(x1, Y(i, 0));
      y0 = std::min(y0, Y(i, 1));
      y1 = std::max(y1, Y(i, 1));
    }
    Node root;
    root.cx = 0.5 * (x0 + x1);
    root.cy = 0.5 * (y0 + y1);
    root.half = 0.5 * std::max({x1 - x0, y1 - y0, 1e-9}) * (1.0 + 1e-9);
    nodes_.push_back(std::move(root));
    for (std::size_t i = 0; i < Y.rows; ++i) insert(static_cast<std::uint32_t>(i));
  }

  // Repulsive force numerator and kernel sum for point i.
  void repulsion(std::size_t i, double theta, double& fx, double& fy, double& sum_q) const {
    const double yx = Y_(i, 0), yy = Y_(i, 1);
    std::vector<int> stack{0};
    while (!stack.empty()) {
      const Node& node = nodes_[static_cast<std::size_t>(stack.back())];
      stack.pop_back();
      if (node.count == 0) continue;
      if (node.child < 0) {
        for (const auto p : node.points) {
          if (p == i) continue;
          const double dx = yx - Y_(p, 0), dy = yy - Y_(p, 1);
          const double q = 1.0 / (1.0 + dx * dx + dy * dy);
          sum_q += q;
          fx += q * q * dx;
          fy += q * q * dy;
        }
        continue;
      }
      const double dx = yx - node.mx, dy = yy - node.my;
      const double d2 = dx * dx + dy * dy;
      if (d2 > 0.0 && 2.0 * node.half < theta * std::sqrt(d2)) {
        const double q = 1.0 / (1.0 + d2);
        const double c = static_cast<double>(node.count);
        sum_q += c * q;
        fx += c * q * q * dx;
        fy += c * q * q * dy;
      } else {
        for (int k = 3; k >= 0; --k) stack.push_back(node.child + k);
      }
    }
  }

 private:
  int quadrant(const Node& node, std::uint32_t p) const {
    return (Y_(p, 0) >= node.cx ? 1 : 0) + (Y_(p, 1) >= node.cy ? 2 : 0);
  }

  void split(std::size_t idx) {
    const int first = static_cast<int>(nodes_.size());
    const double h = nodes_[idx].half * 0.5;
    for (int k = 0; k < 4; ++k) {
      Node c;
      c.half = h;
      c.cx = nodes_[idx].cx + ((k & 1) ? h : -h);
      c.cy = nodes_[idx].cy + ((k & 2) ? h : -h);
      nodes_.push_back(std::move(c));
    }
    nodes_[idx].child = first;
    auto pts = std::move(nodes_[idx].points);
    nodes_[idx].points.clear();
    for (const auto p : pts) place(static_cast<std::size_t>(first + quadrant(nodes_[idx], p)), p);
  }

  void place(std::size_t idx, std::uint32_t p) {
    Node& n = nodes_[idx];
    const double c = static_cast<double>(n.count);
    n.mx = (n.mx * c + Y_(p, 0)) / (c + 1.0);
    n.my = (n.my * c + Y_(p, 1)) / (c + 1.0);
    ++n.count;
    n.points.push_back(p);
  }

  void insert(std::uint32_t p) {
    std::size_t idx = 0;
    for (int depth = 0;; ++depth) {
      Node& n = nodes_[idx];
      if (n.child >= 0) {
        const double c = static_cast<double>(n.count);
        n.mx = (n.mx * c + Y_(p, 0)) / (c + 1.0);
        n.my = (n.my * c + Y_(p, 1)) / (c + 1.0);
        ++n.count;
        idx = static_cast<std::size_t>(n.child + quadrant(n, p));
        continue;
      }
      const bool duplicate = !n.points.empty() && Y_(n.points[0], 0) == Y_(p, 0) && Y_(n.points[0], 1) == Y_(p, 1);
      if (n.points.empty() || duplicate || depth >= kMaxDepth) {
        place(idx, p);
        return;
      }
      split(idx);
    }
  }

  const DenseMatrix& Y_;
  std::vector<Node> nodes_;
};

}  // namespace

SparseAffinity knn_affinities(const DenseMatrix& X, double perplexity) {
  const std::size_t n = X.rows;
  const std::size_t k = std::min(n - 1, static_cast<std::size_t>(std::floor(3.0 * perplexity)));
  std::vector<std::vector<std::pair<std::size_t, double>>> cond(n);
  parallel_for(n, [&](std::size_t i) {
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double s = 0.0;
      for (std::size_t c = 0; c < X.cols; ++c) {
        const double d = X(i, c) - X(j, c);
        s += d * d;
      }
      dist.emplace_back(s, j);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    std::vector<double> d(k);
    for (std::size_t t = 0; t < k; ++t) d[t] = dist[t].first;
    const auto row = conditional_distribution(d, std::min(perplexity, static_cast<double>(k) - 1e-9));
    cond[i].reserve(k);
    for (std::size_t t = 0; t < k; ++t) cond[i].emplace_back(dist[t].second, row.p[t]);
  }, 16);

  std::vector<std::tuple<std::size_t, std::size_t, double>> cells;
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [j, p] : cond[i]) {
      cells.emplace_back(i, j, p);
      cells.emplace_back(j, i, p);
    }
  }
  std::sort(cells.begin(), cells.end());
  SparseAffinity out;
  out.offsets.assign(n + 1, 0);
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  for (std::size_t t = 0; t < cells.size();) {
    const auto [i, j, p0] = cells[t];
    double v = 0.0;
    while (t < cells.size() && std::get<0>(cells[t]) == i && std::get<1>(cells[t]) == j) v += std::get<2>(cells[t++]);
    out.columns.push_back(j);
    out.values.push_back(v * scale);
    ++out.offsets[i + 1];
  }
  std::partial_sum(out.offsets.begin(), out.offsets.end(), out.offsets.begin());
  return out;
}

DenseMatrix bh_gradient(const SparseAffinity& P, const DenseMatrix& Y, double exaggeration, double theta,
                        double* z_out) {
  const std::size_t n = Y.rows;
  const QuadTree tree(Y);
  DenseMatrix rep(n, 2);
  std::vector<double> sum_q(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    double fx = 0.0, fy = 0.0, s = 0.0;
    tree.repulsion(i, theta, fx, fy, s);
    rep(i, 0) = fx;
    rep(i, 1) = fy;
    sum_q[i] = s;
  }, 32);
  const double z = std::accumulate(sum_q.begin(), sum_q.end(), 0.0);
  if (z_out) *z_out = z;

  DenseMatrix grad(n, 2);
  parallel_for(n, [&](std::size_t i) {
    double ax = 0.0, ay = 0.0;
    for (std::size_t t = P.offsets[i]; t < P.offsets[i + 1]; ++t) {
      const std::size_t j = P.columns[t];
      const double dx = Y(i, 0) - Y(j, 0), dy = Y(i, 1) - Y(j, 1);
      const double num = 1.0 / (1.0 + dx * dx + dy * dy);
      ax += P.values[t] * num * dx;
      ay += P.values[t] * num * dy;
    }
    grad(i, 0) = 4.0 * (exaggeration * ax - rep(i, 0) / z);
    grad(i, 1) = 4.0 * (exaggeration * ay - rep(i, 1) / z);
  });
  return grad;
}

double bh_kl(const SparseAffinity& P, const DenseMatrix& Y, double z) {
  double kl = 0.0;
  for (std::size_t i = 0; i + 1 < P.offsets.size(); ++i) {
    for (std::size_t t = P.offsets[i]; t < P.offsets[i + 1]; ++t) {
      const std::size_t j = P.columns[t];
      const double p = P.values[t];
      if (p <= 0.0) continue;
      const double dx = Y(i, 0) - Y(j, 0), dy = Y(i, 1) - Y(j, 1);
      const double q = 1.0 / (1.0 + dx * dx + dy * dy) / z;
      kl += p * std::log(p / q);
    }
  }
  return kl;
}

}  // namespace subjaudit::detail
