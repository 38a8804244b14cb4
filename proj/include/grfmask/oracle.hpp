#pragma once

#include <cstddef>
#include <vector>

#include "grfmask/dense.hpp"
#include "grfmask/feature_map.hpp"
#include "grfmask/graph.hpp"
#include "grfmask/series.hpp"

namespace grfmask {

// Dense paths refuse graphs larger than this unless the caller raises the limit.
inline constexpr std::size_t kDefaultDenseLimit = 2048;
// Row normalizers with magnitude below this are degenerate.
inline constexpr double kDegenerateNormalizer = 1e-6;

DenseMatrix dense_adjacency(const WeightedGraph& g, std::size_t dense_limit = kDefaultDenseLimit);

// M_alpha(G) = sum_k alpha_k W^k, by iterated products. The result is exactly symmetric.
DenseMatrix dense_kernel(const WeightedGraph& g, const CoefficientSeries& alpha,
                         std::size_t dense_limit = kDefaultDenseLimit);

// Phi_G = sum_k f_k W^k; Phi_G Phi_G^T = dense_kernel(g, convolve_full(f, f)).
DenseMatrix dense_features(const WeightedGraph& g, const CoefficientSeries& f,
                           std::size_t dense_limit = kDefaultDenseLimit);

struct PositiveDefiniteReport {
  bool positive_definite = false;
  // min over eigenvalues lambda of W of sum_k alpha_k lambda^k
  double min_value = 0.0;
  std::vector<double> eigenvalues;  // ascending
};

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
// Throws NumericalError if the off-diagonal norm is not below `tolerance` after `max_sweeps`.
std::vector<double> symmetric_eigenvalues(DenseMatrix a, double tolerance = 1e-10,
                                          int max_sweeps = 100);

PositiveDefiniteReport check_positive_definite(const WeightedGraph& g, const CoefficientSeries& alpha,
                                               std::size_t dense_limit = kDefaultDenseLimit);

// D^{-1} A V with A_ij = exp(q_i . k_j), no 1/sqrt(d) scaling, per-row max subtraction.
DenseMatrix softmax_attention(const DenseMatrix& q, const DenseMatrix& k, const DenseMatrix& v);

// D^{-1} (M o A) V. Throws DegenerateNormalization when a row sum of M o A has
// magnitude below kDegenerateNormalizer (for softmax scores the row sum is taken
// after max subtraction, i.e. relative to the row's largest score).
DenseMatrix explicit_masked_attention(const DenseMatrix& q, const DenseMatrix& k, const DenseMatrix& v,
                                      const DenseMatrix& mask, ScoreKind kind);

}  // namespace grfmask
