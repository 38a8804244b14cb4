#pragma once

// Shared generators and brute-force reference computations for the tests.
// Everything here is deliberately naive and independent of src/.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "grfmask/dense.hpp"
#include "grfmask/feature_map.hpp"
#include "grfmask/graph.hpp"
#include "grfmask/series.hpp"

namespace testing {

using grfmask::CoefficientSeries;
using grfmask::DenseMatrix;
using grfmask::Edge;
using grfmask::NodeId;
using grfmask::WeightedGraph;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::size_t index(std::size_t lo, std::size_t hi) {  // inclusive
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  bool coin(double p) { return uniform(0.0, 1.0) < p; }
  std::mt19937_64& engine() { return rng_; }

  // Erdos-Renyi style graph; weights drawn from [lo, hi] (never zero).
  WeightedGraph graph(std::size_t n, double density, double lo = 0.1, double hi = 1.0) {
    std::vector<Edge> edges;
    for (NodeId i = 0; i < n; ++i) {
      for (NodeId j = i + 1; j < n; ++j) {
        if (coin(density)) edges.push_back({i, j, uniform(lo, hi)});
      }
    }
    return WeightedGraph(n, edges);
  }

  // Weights of either sign.
  WeightedGraph signed_graph(std::size_t n, double density) {
    std::vector<Edge> edges;
    for (NodeId i = 0; i < n; ++i) {
      for (NodeId j = i + 1; j < n; ++j) {
        if (!coin(density)) continue;
        double w = uniform(0.1, 1.0);
        if (coin(0.5)) w = -w;
        edges.push_back({i, j, w});
      }
    }
    return WeightedGraph(n, edges);
  }

  std::vector<double> vector(std::size_t n, double lo, double hi) {
    std::vector<double> out(n);
    for (auto& x : out) x = uniform(lo, hi);
    return out;
  }

  DenseMatrix matrix(std::size_t rows, std::size_t cols, double lo = -1.0, double hi = 1.0) {
    return DenseMatrix(rows, cols, vector(rows * cols, lo, hi));
  }

  std::vector<NodeId> permutation(std::size_t n) {
    std::vector<NodeId> p(n);
    std::iota(p.begin(), p.end(), NodeId{0});
    std::shuffle(p.begin(), p.end(), rng_);
    return p;
  }

 private:
  std::mt19937_64 rng_;
};

inline DenseMatrix naive_adjacency(const WeightedGraph& g) {
  const std::size_t n = g.node_count();
  DenseMatrix w(n, n);
  for (const auto& e : g.edges()) {
    w(e.u, e.v) = e.weight;
    w(e.v, e.u) = e.weight;
  }
  return w;
}

inline DenseMatrix naive_product(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

// sum_k c_k W^k, each power formed from scratch
inline DenseMatrix naive_series(const WeightedGraph& g, const std::vector<double>& c) {
  const DenseMatrix w = naive_adjacency(g);
  const std::size_t n = g.node_count();
  DenseMatrix out(n, n);
  for (std::size_t k = 0; k < c.size(); ++k) {
    DenseMatrix p = DenseMatrix::identity(n);
    for (std::size_t r = 0; r < k; ++r) p = naive_product(p, w);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out(i, j) += c[k] * p(i, j);
  }
  return out;
}

inline std::vector<double> naive_convolve(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

inline double naive_phi(double x, grfmask::FeatureMapKind kind) {
  if (kind == grfmask::FeatureMapKind::relu) return x > 0 ? x : 0.0;
  return x > 0 ? x + 1.0 : std::exp(x);
}

// D^{-1} (M o A) V written out entry by entry. linear=false means exp scores.
inline DenseMatrix naive_masked_attention(const DenseMatrix& q, const DenseMatrix& k, const DenseMatrix& v,
                                          const DenseMatrix& m, bool linear, grfmask::FeatureMapKind kind) {
  const std::size_t n = q.rows();
  DenseMatrix out(n, v.cols());
  for (std::size_t i = 0; i < n; ++i) {
    double denom = 0.0;
    std::vector<double> num(v.cols(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      double a = 0.0;
      for (std::size_t c = 0; c < q.cols(); ++c) {
        a += linear ? naive_phi(q(i, c), kind) * naive_phi(k(j, c), kind) : q(i, c) * k(j, c);
      }
      if (!linear) a = std::exp(a);
      const double s = m(i, j) * a;
      denom += s;
      for (std::size_t c = 0; c < v.cols(); ++c) num[c] += s * v(j, c);
    }
    for (std::size_t c = 0; c < v.cols(); ++c) out(i, c) = num[c] / denom;
  }
  return out;
}

inline double max_abs(const DenseMatrix& a, const DenseMatrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  return worst;
}

inline DenseMatrix permute_rows(const DenseMatrix& m, const std::vector<NodeId>& perm) {
  DenseMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t c = 0; c < m.cols(); ++c) out(i, c) = m(perm[i], c);
  return out;
}

}  // namespace testing
