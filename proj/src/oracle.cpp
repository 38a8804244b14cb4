#include "grfmask/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "grfmask/errors.hpp"

namespace grfmask {
namespace {

void check_limit(std::size_t n, std::size_t limit, const char* what) {
  if (n > limit) {
    throw InvalidArgument(std::string(what) + ": N = " + std::to_string(n) +
                          " exceeds the dense limit " + std::to_string(limit));
  }
}

void mirror_upper(DenseMatrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = i + 1; j < m.cols(); ++j) m(j, i) = m(i, j);
  }
}

DenseMatrix power_series(const WeightedGraph& g, const CoefficientSeries& coeffs, std::size_t limit,
                         const char* what) {
  const std::size_t n = g.node_count();
  check_limit(n, limit, what);
  const DenseMatrix w = dense_adjacency(g, limit);
  DenseMatrix sum(n, n);
  DenseMatrix power = DenseMatrix::identity(n);
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (k > 0) power = matmul(power, w);
    const double c = coeffs[k];
    if (c == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      auto dst = sum.row(i);
      auto src = power.row(i);
      for (std::size_t j = 0; j < n; ++j) dst[j] += c * src[j];
    }
  }
  mirror_upper(sum);
  return sum;
}

void check_attention_shapes(const DenseMatrix& q, const DenseMatrix& k, const DenseMatrix& v) {
  if (q.rows() != k.rows() || q.rows() != v.rows() || q.cols() != k.cols()) {
    throw ShapeError("attention: Q, K, V must be N x d with matching N and Q/K widths");
  }
}

}  // namespace

DenseMatrix dense_adjacency(const WeightedGraph& g, std::size_t dense_limit) {
  check_limit(g.node_count(), dense_limit, "dense_adjacency");
  DenseMatrix w(g.node_count(), g.node_count());
  for (NodeId i = 0; i < g.node_count(); ++i) {
    for (const Neighbor& nb : g.neighbors(i)) w(i, nb.node) = nb.weight;
  }
  return w;
}

DenseMatrix dense_kernel(const WeightedGraph& g, const CoefficientSeries& alpha, std::size_t dense_limit) {
  return power_series(g, alpha, dense_limit, "dense_kernel");
}

DenseMatrix dense_features(const WeightedGraph& g, const CoefficientSeries& f, std::size_t dense_limit) {
  return power_series(g, f, dense_limit, "dense_features");
}

std::vector<double> symmetric_eigenvalues(DenseMatrix a, double tolerance, int max_sweeps) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw ShapeError("symmetric_eigenvalues: matrix must be square");
  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j) s += a(i, j) * a(i, j);
      }
    }
    return std::sqrt(s);
  };
  int sweep = 0;
  while (off_norm() >= tolerance) {
    if (sweep++ == max_sweeps) {
      throw NumericalError("Jacobi eigenvalue iteration did not converge in " +
                           std::to_string(max_sweeps) + " sweeps");
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t r = 0; r < n; ++r) {
          const double arp = a(r, p);
          const double arq = a(r, q);
          a(r, p) = c * arp - s * arq;
          a(r, q) = s * arp + c * arq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double apr = a(p, r);
          const double aqr = a(q, r);
          a(p, r) = c * apr - s * aqr;
          a(q, r) = s * apr + c * aqr;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

PositiveDefiniteReport check_positive_definite(const WeightedGraph& g, const CoefficientSeries& alpha,
                                               std::size_t dense_limit) {
  PositiveDefiniteReport report;
  report.eigenvalues = symmetric_eigenvalues(dense_adjacency(g, dense_limit));
  report.min_value = std::numeric_limits<double>::infinity();
  for (double lambda : report.eigenvalues) {
    double value = 0.0;
    for (std::size_t k = alpha.size(); k-- > 0;) value = value * lambda + alpha[k];
    report.min_value = std::min(report.min_value, value);
  }
  if (report.eigenvalues.empty()) report.min_value = alpha[0];
  report.positive_definite = report.min_value > 0.0;
  return report;
}

DenseMatrix softmax_attention(const DenseMatrix& q, const DenseMatrix& k, const DenseMatrix& v) {
  return explicit_masked_attention(q, k, v, DenseMatrix(q.rows(), q.rows(), 1.0), ScoreKind::softmax());
}

DenseMatrix explicit_masked_attention(const DenseMatrix& q, const DenseMatrix& k, const DenseMatrix& v,
                                      const DenseMatrix& mask, ScoreKind kind) {
  check_attention_shapes(q, k, v);
  const std::size_t n = q.rows();
  if (mask.rows() != n || mask.cols() != n) throw ShapeError("explicit_masked_attention: mask must be N x N");
  DenseMatrix phi_q;
  DenseMatrix phi_k;
  if (kind.type == ScoreKind::Type::linear) {
    phi_q = feature_map_rows(q, kind.map);
    phi_k = feature_map_rows(k, kind.map);
  }
  const DenseMatrix& left = kind.type == ScoreKind::Type::linear ? phi_q : q;
  const DenseMatrix& right = kind.type == ScoreKind::Type::linear ? phi_k : k;
  DenseMatrix scores = matmul_transposed(left, right);
  DenseMatrix out(n, v.cols());
  std::vector<double> weights(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto s = scores.row(i);
    if (kind.type == ScoreKind::Type::softmax) {
      const double top = *std::max_element(s.begin(), s.end());
      for (double& x : s) x = std::exp(x - top);
    }
    double norm = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      weights[j] = mask(i, j) * s[j];
      norm += weights[j];
    }
    if (std::abs(norm) < kDegenerateNormalizer) {
      throw DegenerateNormalization("explicit_masked_attention: row " + std::to_string(i) +
                                    " has normalizer " + format_double(norm));
    }
    auto dst = out.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (weights[j] == 0.0) continue;
      auto vj = v.row(j);
      for (std::size_t b = 0; b < dst.size(); ++b) dst[b] += weights[j] * vj[b];
    }
    for (double& x : dst) x /= norm;
  }
  return out;
}

}  // namespace grfmask
