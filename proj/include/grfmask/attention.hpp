#pragma once

#include <cstdint>
#include <vector>

#include "grfmask/dense.hpp"
#include "grfmask/feature_map.hpp"
#include "grfmask/graph.hpp"
#include "grfmask/grf.hpp"
#include "grfmask/series.hpp"

namespace grfmask {

struct AttentionOutput {
  DenseMatrix values;                   // N x d; degenerate rows are zero
  std::vector<double> row_normalizers;  // D_ii
  std::vector<NodeId> degenerate_rows;  // rows with |D_ii| < kDegenerateNormalizer
};

// Multiply-accumulates executed by the instrumented paths.
struct OpCounter {
  std::uint64_t macs = 0;
};

// phi_Q (phi_K^T V) and phi_Q (phi_K^T 1), in that association order.
AttentionOutput linear_attention_unmasked(const DenseMatrix& q, const DenseMatrix& k, const DenseMatrix& v,
                                          FeatureMapKind kind);

// Linear attention masked by M = phi_g phi_g^T, computed through the factored
// contraction over the graph-feature axis without forming M, A, or the N x Nm
// outer-product feature matrix. O(N^2 m d).
AttentionOutput masked_linear_attention_dense(const DenseMatrix& q, const DenseMatrix& k,
                                              const DenseMatrix& v, const DenseMatrix& phi_g,
                                              FeatureMapKind kind);

// Same contraction with sparse GRFs shared between the query and key side.
// Work is proportional to the total number of GRF nonzeros, not N^2.
AttentionOutput masked_linear_attention_grf(const DenseMatrix& q, const DenseMatrix& k, const DenseMatrix& v,
                                            const GrfSet& grfs, FeatureMapKind kind,
                                            OpCounter* counter = nullptr);

// Asymmetric GRF masking by walk enumeration (key-side features are the identity).
// f_alpha is used directly as f^(1); walks are those of build_grf_set(g, f_alpha,
// p_halt, n_walks, seed), so this equals explicit masked attention with the
// densified asymmetric GRF matrix as mask.
AttentionOutput masked_attention_asymmetric(const DenseMatrix& q, const DenseMatrix& k, const DenseMatrix& v,
                                            const WeightedGraph& g, const CoefficientSeries& f_alpha,
                                            double p_halt, std::size_t n_walks, std::uint64_t seed,
                                            FeatureMapKind kind);

}  // namespace grfmask
