#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "grfmask/dense.hpp"
#include "grfmask/graph.hpp"
#include "grfmask/series.hpp"
#include "grfmask/walks.hpp"

namespace grfmask {

// Sparse vector with strictly increasing indices and no stored zeros.
class SparseVector {
 public:
  struct Entry {
    NodeId index;
    double value;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  explicit SparseVector(std::size_t dim = 0) : dim_(dim) {}
  SparseVector(std::size_t dim, std::vector<Entry> entries);

  std::size_t dim() const { return dim_; }
  std::size_t nnz() const { return entries_.size(); }
  std::span<const Entry> entries() const { return entries_; }
  double value_at(NodeId index) const;
  std::vector<double> to_dense() const;

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  std::size_t dim_;
  std::vector<Entry> entries_;
};

// Sorted-merge dot product. Throws ShapeError on dimension mismatch.
double gram_entry(const SparseVector& a, const SparseVector& b);

enum class GrfVariant {
  symmetric,      // importance-weighted, f on both query and key side
  asymmetric_f1,  // importance-weighted with f = f^(1) = alpha; key side f^(2) = delta_0
  adhoc,          // no edge-weight product, no 1/p reweighting
};

GrfVariant parse_grf_variant(const std::string& name);
std::string to_string(GrfVariant variant);

struct GrfSet {
  std::vector<SparseVector> features;  // one per node, each of dimension N
  std::size_t n_walks = 0;
  double p_halt = 0.5;
  CoefficientSeries f;
  std::uint64_t master_seed = 0;
  GrfVariant variant = GrfVariant::symmetric;

  friend bool operator==(const GrfSet&, const GrfSet&) = default;
};

// Dense accumulator with touched-index tracking; one per worker, reused across nodes
// so building all N features stays linear in N.
class FeatureAccumulator {
 public:
  explicit FeatureAccumulator(std::size_t dim) : values_(dim, 0.0), seen_(dim, 0) {}
  void add(NodeId index, double value);
  // Sorted sparse result divided by `divisor`; exact zeros are dropped. Resets the buffer.
  SparseVector compact(double divisor);

 private:
  std::vector<double> values_;
  std::vector<char> seen_;
  std::vector<NodeId> touched_;
};

// Feature of walks.front().start() from fixed walks. Prefixes longer than f.i_max()
// contribute nothing. importance_weighted=false gives the ad-hoc feature.
SparseVector feature_from_walks(const WeightedGraph& g, std::span<const Walk> walks,
                                const CoefficientSeries& f, bool importance_weighted,
                                FeatureAccumulator& scratch);

// phi_hat(v_node) from n_walks fresh walks; walk k uses PhiloxStream(seed, node, k).
SparseVector build_grf(const WeightedGraph& g, NodeId node, const CoefficientSeries& f, double p_halt,
                       std::size_t n_walks, std::uint64_t seed);
SparseVector build_adhoc_feature(const WeightedGraph& g, NodeId node, const CoefficientSeries& f,
                                 double p_halt, std::size_t n_walks, std::uint64_t seed);

// Features of every node, built in parallel. Bitwise identical for any worker count.
GrfSet build_grf_set(const WeightedGraph& g, const CoefficientSeries& f, double p_halt, std::size_t n_walks,
                     std::uint64_t seed, GrfVariant variant = GrfVariant::symmetric);

// N x N matrix whose row i is features[i].
DenseMatrix densify(const GrfSet& set);
// Entry (i, j) = gram_entry(a.features[i], b.features[j]).
DenseMatrix gram_matrix(const GrfSet& a, const GrfSet& b);

// Relabels nodes: result.features[i] is set.features[perm[i]] with indices mapped
// through the inverse permutation (matches permute_nodes).
GrfSet permute_features(const GrfSet& set, std::span<const NodeId> perm);

// JSON dump: {"config": {...}, "features": [[[index, value], ...], ...]}.
void write_grf_json(std::ostream& out, const GrfSet& set);

}  // namespace grfmask
