#include "grfmask/walks.hpp"

#include <ostream>

#include "grfmask/errors.hpp"

namespace grfmask {

Walk sample_walk(const WeightedGraph& g, NodeId start, double p_halt, PhiloxStream& stream,
                 std::size_t max_hops) {
  if (!(p_halt > 0.0 && p_halt <= 1.0)) throw InvalidArgument("sample_walk: p_halt must be in (0, 1]");
  if (start >= g.node_count()) throw IndexError("sample_walk: start node out of range");
  Walk walk;
  walk.p_halt = p_halt;
  walk.nodes.push_back(start);
  NodeId current = start;
  while (walk.hops() < max_hops) {
    const auto nbrs = g.neighbors(current);
    if (nbrs.empty()) break;
    if (stream.uniform() < p_halt) break;
    const auto degree = static_cast<std::uint32_t>(nbrs.size());
    current = nbrs[stream.uniform_index(degree)].node;
    walk.departure_degrees.push_back(degree);
    walk.nodes.push_back(current);
  }
  return walk;
}

std::vector<Walk> sample_walks(const WeightedGraph& g, NodeId start, double p_halt, std::size_t n_walks,
                               std::uint64_t seed, std::size_t max_hops) {
  std::vector<Walk> walks;
  walks.reserve(n_walks);
  for (std::size_t k = 0; k < n_walks; ++k) {
    PhiloxStream stream(seed, start, static_cast<std::uint32_t>(k));
    walks.push_back(sample_walk(g, start, p_halt, stream, max_hops));
  }
  return walks;
}

Walk make_walk(const WeightedGraph& g, std::span<const NodeId> nodes, double p_halt) {
  if (nodes.empty()) throw InvalidArgument("make_walk: empty node sequence");
  Walk walk;
  walk.p_halt = p_halt;
  walk.nodes.assign(nodes.begin(), nodes.end());
  for (std::size_t t = 0; t + 1 < nodes.size(); ++t) {
    if (!g.weight(nodes[t], nodes[t + 1])) throw InvalidArgument("make_walk: consecutive nodes not adjacent");
    walk.departure_degrees.push_back(static_cast<std::uint32_t>(g.degree(nodes[t])));
  }
  return walk;
}

double prefix_probability(const Walk& w, std::size_t hops) {
  if (hops > w.hops()) throw IndexError("prefix_probability: prefix longer than walk");
  double p = 1.0;
  for (std::size_t t = 0; t < hops; ++t) p *= (1.0 - w.p_halt) / w.departure_degrees[t];
  return p;
}

double edge_weight_product(const WeightedGraph& g, const Walk& w, std::size_t hops) {
  if (hops > w.hops()) throw IndexError("edge_weight_product: prefix longer than walk");
  double product = 1.0;
  for (std::size_t t = 1; t <= hops; ++t) product *= *g.weight(w.nodes[t - 1], w.nodes[t]);
  return product;
}

void write_walk_dump(std::ostream& out, std::span<const Walk> walks) {
  for (const Walk& w : walks) {
    out << w.start() << ':';
    for (NodeId node : w.nodes) out << ' ' << node;
    out << '\n';
  }
}

}  // namespace grfmask
