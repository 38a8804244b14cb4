#include "grfmask/grf.hpp"

#include <algorithm>
#include <ostream>

#include "grfmask/errors.hpp"
#include "grfmask/parallel.hpp"
#include "json.hpp"

namespace grfmask {

SparseVector::SparseVector(std::size_t dim, std::vector<Entry> entries)
    : dim_(dim), entries_(std::move(entries)) {
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    if (entries_[k].index >= dim_) throw IndexError("SparseVector: index out of range");
    if (k > 0 && entries_[k].index <= entries_[k - 1].index) {
      throw InvalidArgument("SparseVector: indices must be strictly increasing");
    }
    if (entries_[k].value == 0.0) throw InvalidArgument("SparseVector: stored zero");
  }
}

double SparseVector::value_at(NodeId index) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                             [](const Entry& e, NodeId key) { return e.index < key; });
  return it != entries_.end() && it->index == index ? it->value : 0.0;
}

std::vector<double> SparseVector::to_dense() const {
  std::vector<double> out(dim_, 0.0);
  for (const Entry& e : entries_) out[e.index] = e.value;
  return out;
}

double gram_entry(const SparseVector& a, const SparseVector& b) {
  if (a.dim() != b.dim()) throw ShapeError("gram_entry: dimension mismatch");
  const auto x = a.entries();
  const auto y = b.entries();
  double sum = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i].index < y[j].index) {
      ++i;
    } else if (y[j].index < x[i].index) {
      ++j;
    } else {
      sum += x[i++].value * y[j++].value;
    }
  }
  return sum;
}

GrfVariant parse_grf_variant(const std::string& name) {
  if (name == "symmetric") return GrfVariant::symmetric;
  if (name == "asymmetric-f1") return GrfVariant::asymmetric_f1;
  if (name == "adhoc") return GrfVariant::adhoc;
  throw InvalidArgument("unknown GRF variant '" + name + "'");
}

std::string to_string(GrfVariant variant) {
  switch (variant) {
    case GrfVariant::symmetric: return "symmetric";
    case GrfVariant::asymmetric_f1: return "asymmetric-f1";
    case GrfVariant::adhoc: return "adhoc";
  }
  return "symmetric";
}

void FeatureAccumulator::add(NodeId index, double value) {
  if (!seen_[index]) {
    seen_[index] = 1;
    touched_.push_back(index);
  }
  values_[index] += value;
}

SparseVector FeatureAccumulator::compact(double divisor) {
  std::sort(touched_.begin(), touched_.end());
  std::vector<SparseVector::Entry> entries;
  entries.reserve(touched_.size());
  for (NodeId index : touched_) {
    const double value = values_[index] / divisor;
    if (value != 0.0) entries.push_back({index, value});
    values_[index] = 0.0;
    seen_[index] = 0;
  }
  touched_.clear();
  return SparseVector(values_.size(), std::move(entries));
}

SparseVector feature_from_walks(const WeightedGraph& g, std::span<const Walk> walks,
                                const CoefficientSeries& f, bool importance_weighted,
                                FeatureAccumulator& scratch) {
  if (walks.empty()) throw InvalidArgument("feature_from_walks: at least one walk required");
  for (const Walk& walk : walks) {
    const std::size_t last = std::min(walk.hops(), f.i_max());
    double load = 1.0;  // edge-weight product / prefix probability
    for (std::size_t t = 0; t <= last; ++t) {
      if (t > 0) {
        const NodeId from = walk.nodes[t - 1];
        const NodeId to = walk.nodes[t];
        load *= *g.weight(from, to) * walk.departure_degrees[t - 1] / (1.0 - walk.p_halt);
      }
      scratch.add(walk.nodes[t], importance_weighted ? load * f[t] : f[t]);
    }
  }
  return scratch.compact(static_cast<double>(walks.size()));
}

namespace {

void check_sampling(double p_halt, std::size_t n_walks) {
  if (n_walks == 0) throw InvalidArgument("GRF: n_walks must be >= 1");
  if (!(p_halt > 0.0 && p_halt < 1.0)) throw InvalidArgument("GRF: p_halt must be in (0, 1)");
}

SparseVector build_feature(const WeightedGraph& g, NodeId node, const CoefficientSeries& f, double p_halt,
                           std::size_t n_walks, std::uint64_t seed, bool importance_weighted,
                           FeatureAccumulator& scratch) {
  const auto walks = sample_walks(g, node, p_halt, n_walks, seed, f.i_max());
  return feature_from_walks(g, walks, f, importance_weighted, scratch);
}

}  // namespace

SparseVector build_grf(const WeightedGraph& g, NodeId node, const CoefficientSeries& f, double p_halt,
                       std::size_t n_walks, std::uint64_t seed) {
  check_sampling(p_halt, n_walks);
  FeatureAccumulator scratch(g.node_count());
  return build_feature(g, node, f, p_halt, n_walks, seed, true, scratch);
}

SparseVector build_adhoc_feature(const WeightedGraph& g, NodeId node, const CoefficientSeries& f,
                                 double p_halt, std::size_t n_walks, std::uint64_t seed) {
  check_sampling(p_halt, n_walks);
  FeatureAccumulator scratch(g.node_count());
  return build_feature(g, node, f, p_halt, n_walks, seed, false, scratch);
}

GrfSet build_grf_set(const WeightedGraph& g, const CoefficientSeries& f, double p_halt, std::size_t n_walks,
                     std::uint64_t seed, GrfVariant variant) {
  check_sampling(p_halt, n_walks);
  const std::size_t n = g.node_count();
  GrfSet set{std::vector<SparseVector>(n), n_walks, p_halt, f, seed, variant};
  std::vector<FeatureAccumulator> scratch;
  const std::size_t workers = std::min(thread_count(), std::max<std::size_t>(n, 1));
  scratch.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) scratch.emplace_back(n);
  const bool weighted = variant != GrfVariant::adhoc;
  parallel_for(n, [&](std::size_t i, std::size_t worker) {
    set.features[i] =
        build_feature(g, static_cast<NodeId>(i), f, p_halt, n_walks, seed, weighted, scratch[worker]);
  });
  return set;
}

DenseMatrix densify(const GrfSet& set) {
  const std::size_t n = set.features.size();
  DenseMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& e : set.features[i].entries()) out(i, e.index) = e.value;
  }
  return out;
}

DenseMatrix gram_matrix(const GrfSet& a, const GrfSet& b) {
  if (a.features.size() != b.features.size()) throw ShapeError("gram_matrix: feature sets differ in size");
  const std::size_t n = a.features.size();
  DenseMatrix out(n, n);
  parallel_for(n, [&](std::size_t i, std::size_t) {
    for (std::size_t j = 0; j < n; ++j) out(i, j) = gram_entry(a.features[i], b.features[j]);
  });
  return out;
}

GrfSet permute_features(const GrfSet& set, std::span<const NodeId> perm) {
  const std::size_t n = set.features.size();
  if (perm.size() != n) throw ShapeError("permute_features: permutation size mismatch");
  std::vector<NodeId> inverse(n);
  for (NodeId i = 0; i < n; ++i) inverse[perm[i]] = i;
  GrfSet out = set;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& src = set.features[perm[i]];
    std::vector<SparseVector::Entry> entries;
    for (const auto& e : src.entries()) entries.push_back({inverse[e.index], e.value});
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.index < b.index; });
    out.features[i] = SparseVector(n, std::move(entries));
  }
  return out;
}

void write_grf_json(std::ostream& out, const GrfSet& set) {
  nlohmann::ordered_json doc;
  doc["config"] = {{"n_walks", set.n_walks},
                   {"p_halt", set.p_halt},
                   {"f", std::vector<double>(set.f.coeffs().begin(), set.f.coeffs().end())},
                   {"seed", set.master_seed},
                   {"variant", to_string(set.variant)}};
  auto features = nlohmann::ordered_json::array();
  for (const auto& feature : set.features) {
    auto row = nlohmann::ordered_json::array();
    for (const auto& e : feature.entries()) row.push_back({e.index, e.value});
    features.push_back(std::move(row));
  }
  doc["features"] = std::move(features);
  out << doc.dump(2) << '\n';
}

}  // namespace grfmask
