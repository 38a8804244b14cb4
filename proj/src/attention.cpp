#include "grfmask/attention.hpp"

#include <algorithm>
#include <cmath>

#include "grfmask/errors.hpp"
#include "grfmask/oracle.hpp"
#include "grfmask/parallel.hpp"
#include "grfmask/walks.hpp"

namespace grfmask {
namespace {

void check_shapes(const DenseMatrix& q, const DenseMatrix& k, const DenseMatrix& v) {
  if (q.rows() != k.rows() || q.rows() != v.rows() || q.cols() != k.cols()) {
    throw ShapeError("attention: Q, K, V must be N x d with matching N and Q/K widths");
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Divides numerator rows by their normalizers, zeroing and listing degenerate rows.
AttentionOutput finish(DenseMatrix numerator, std::vector<double> normalizers) {
  AttentionOutput out{std::move(numerator), std::move(normalizers), {}};
  for (std::size_t i = 0; i < out.values.rows(); ++i) {
    auto row = out.values.row(i);
    const double norm = out.row_normalizers[i];
    if (std::abs(norm) < kDegenerateNormalizer) {
      std::fill(row.begin(), row.end(), 0.0);
      out.degenerate_rows.push_back(static_cast<NodeId>(i));
    } else {
      for (double& x : row) x /= norm;
    }
  }
  return out;
}

// Graph-feature-axis contraction shared by the dense and GRF paths.
// For each graph coordinate l: T_l = sum_j g_jl phi(k_j) v_j^T (m x d) and
// z_l = sum_j g_jl phi(k_j) (m). Then numerator_i = sum_l g_il phi(q_i)^T T_l.
class FactoredContraction {
 public:
  FactoredContraction(std::size_t n_coords, std::size_t m, std::size_t d)
      : m_(m), d_(d), t_(n_coords * m * d, 0.0), z_(n_coords * m, 0.0) {}

  void deposit(std::size_t coord, double weight, std::span<const double> phi_k, std::span<const double> v) {
    double* t = &t_[coord * m_ * d_];
    double* z = &z_[coord * m_];
    for (std::size_t a = 0; a < m_; ++a) {
      const double s = weight * phi_k[a];
      z[a] += s;
      double* ta = t + a * d_;
      for (std::size_t b = 0; b < d_; ++b) ta[b] += s * v[b];
    }
  }

  void apply(std::size_t coord, double weight, std::span<const double> phi_q, std::span<double> numerator,
             double& normalizer) const {
    const double* t = &t_[coord * m_ * d_];
    const double* z = &z_[coord * m_];
    for (std::size_t a = 0; a < m_; ++a) {
      const double s = weight * phi_q[a];
      normalizer += s * z[a];
      const double* ta = t + a * d_;
      for (std::size_t b = 0; b < d_; ++b) numerator[b] += s * ta[b];
    }
  }

  // MACs per deposit/apply call: m scalings, m*d updates, m normalizer updates.
  std::uint64_t macs_per_call() const { return m_ * (d_ + 2); }

 private:
  std::size_t m_;
  std::size_t d_;
  std::vector<double> t_;
  std::vector<double> z_;
};

}  // namespace

AttentionOutput linear_attention_unmasked(const DenseMatrix& q, const DenseMatrix& k, const DenseMatrix& v,
                                          FeatureMapKind kind) {
  check_shapes(q, k, v);
  const std::size_t n = q.rows();
  const DenseMatrix phi_q = feature_map_rows(q, kind);
  const DenseMatrix phi_k = feature_map_rows(k, kind);
  const std::size_t m = phi_k.cols();
  const std::size_t d = v.cols();
  DenseMatrix kv(m, d);
  std::vector<double> ksum(m, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t a = 0; a < m; ++a) {
      const double s = phi_k(j, a);
      ksum[a] += s;
      for (std::size_t b = 0; b < d; ++b) kv(a, b) += s * v(j, b);
    }
  }
  DenseMatrix numerator(n, d);
  std::vector<double> normalizers(n, 0.0);
  parallel_for(n, [&](std::size_t i, std::size_t) {
    auto row = numerator.row(i);
    for (std::size_t a = 0; a < m; ++a) {
      const double s = phi_q(i, a);
      normalizers[i] += s * ksum[a];
      for (std::size_t b = 0; b < d; ++b) row[b] += s * kv(a, b);
    }
  });
  return finish(std::move(numerator), std::move(normalizers));
}

AttentionOutput masked_linear_attention_dense(const DenseMatrix& q, const DenseMatrix& k,
                                              const DenseMatrix& v, const DenseMatrix& phi_g,
                                              FeatureMapKind kind) {
  check_shapes(q, k, v);
  const std::size_t n = q.rows();
  if (phi_g.rows() != n) throw ShapeError("masked_linear_attention_dense: phi_g must have N rows");
  const DenseMatrix phi_q = feature_map_rows(q, kind);
  const DenseMatrix phi_k = feature_map_rows(k, kind);
  const std::size_t coords = phi_g.cols();
  FactoredContraction contraction(coords, phi_k.cols(), v.cols());
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t l = 0; l < coords; ++l) {
      if (phi_g(j, l) != 0.0) contraction.deposit(l, phi_g(j, l), phi_k.row(j), v.row(j));
    }
  }
  DenseMatrix numerator(n, v.cols());
  std::vector<double> normalizers(n, 0.0);
  parallel_for(n, [&](std::size_t i, std::size_t) {
    for (std::size_t l = 0; l < coords; ++l) {
      if (phi_g(i, l) != 0.0) contraction.apply(l, phi_g(i, l), phi_q.row(i), numerator.row(i), normalizers[i]);
    }
  });
  return finish(std::move(numerator), std::move(normalizers));
}

AttentionOutput masked_linear_attention_grf(const DenseMatrix& q, const DenseMatrix& k, const DenseMatrix& v,
                                            const GrfSet& grfs, FeatureMapKind kind, OpCounter* counter) {
  check_shapes(q, k, v);
  const std::size_t n = q.rows();
  if (grfs.features.size() != n) throw ShapeError("masked_linear_attention_grf: GrfSet size != N");
  const DenseMatrix phi_q = feature_map_rows(q, kind);
  const DenseMatrix phi_k = feature_map_rows(k, kind);
  FactoredContraction contraction(n, phi_k.cols(), v.cols());

  // Transpose the features so each coordinate's deposits are gathered in
  // ascending j, which lets coordinates be filled in parallel deterministically.
  std::vector<std::size_t> offsets(n + 1, 0);
  std::uint64_t total_nnz = 0;
  for (const auto& feature : grfs.features) {
    if (feature.dim() != n) throw ShapeError("masked_linear_attention_grf: feature dimension != N");
    for (const auto& e : feature.entries()) ++offsets[e.index + 1];
    total_nnz += feature.nnz();
  }
  for (std::size_t l = 0; l < n; ++l) offsets[l + 1] += offsets[l];
  std::vector<SparseVector::Entry> by_coord(total_nnz);
  std::vector<std::size_t> fill(offsets.begin(), offsets.end() - 1);
  for (NodeId j = 0; j < n; ++j) {
    for (const auto& e : grfs.features[j].entries()) by_coord[fill[e.index]++] = {j, e.value};
  }
  parallel_for(n, [&](std::size_t l, std::size_t) {
    for (std::size_t p = offsets[l]; p < offsets[l + 1]; ++p) {
      const NodeId j = by_coord[p].index;
      contraction.deposit(l, by_coord[p].value, phi_k.row(j), v.row(j));
    }
  });

  DenseMatrix numerator(n, v.cols());
  std::vector<double> normalizers(n, 0.0);
  parallel_for(n, [&](std::size_t i, std::size_t) {
    for (const auto& e : grfs.features[i].entries()) {
      contraction.apply(e.index, e.value, phi_q.row(i), numerator.row(i), normalizers[i]);
    }
  });
  if (counter) counter->macs += 2 * total_nnz * contraction.macs_per_call();
  return finish(std::move(numerator), std::move(normalizers));
}

AttentionOutput masked_attention_asymmetric(const DenseMatrix& q, const DenseMatrix& k, const DenseMatrix& v,
                                            const WeightedGraph& g, const CoefficientSeries& f_alpha,
                                            double p_halt, std::size_t n_walks, std::uint64_t seed,
                                            FeatureMapKind kind) {
  check_shapes(q, k, v);
  const std::size_t n = q.rows();
  if (g.node_count() != n) throw ShapeError("masked_attention_asymmetric: graph size != N");
  if (n_walks == 0) throw InvalidArgument("masked_attention_asymmetric: n_walks must be >= 1");
  if (!(p_halt > 0.0 && p_halt < 1.0)) throw InvalidArgument("masked_attention_asymmetric: p_halt must be in (0, 1)");
  const DenseMatrix phi_q = feature_map_rows(q, kind);
  const DenseMatrix phi_k = feature_map_rows(k, kind);
  DenseMatrix numerator(n, v.cols());
  std::vector<double> normalizers(n, 0.0);
  parallel_for(n, [&](std::size_t i, std::size_t) {
    const auto node = static_cast<NodeId>(i);
    auto row = numerator.row(i);
    for (std::size_t walk_index = 0; walk_index < n_walks; ++walk_index) {
      PhiloxStream stream(seed, node, static_cast<std::uint32_t>(walk_index));
      const Walk walk = sample_walk(g, node, p_halt, stream, f_alpha.i_max());
      double load = 1.0;
      for (std::size_t t = 0; t <= walk.hops(); ++t) {
        const NodeId j = walk.nodes[t];
        if (t > 0) load *= *g.weight(walk.nodes[t - 1], j) * walk.departure_degrees[t - 1] / (1.0 - p_halt);
        const double coeff = dot(phi_q.row(i), phi_k.row(j)) * f_alpha[t] * load;
        normalizers[i] += coeff;
        auto vj = v.row(j);
        for (std::size_t b = 0; b < row.size(); ++b) row[b] += coeff * vj[b];
      }
    }
    // Average over walks so normalizers match (A o Phi1) 1 with Phi1 the averaged features.
    const auto walks = static_cast<double>(n_walks);
    for (double& x : row) x /= walks;
    normalizers[i] /= walks;
  });
  return finish(std::move(numerator), std::move(normalizers));
}

}  // namespace grfmask
