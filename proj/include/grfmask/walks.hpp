#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "grfmask/graph.hpp"
#include "grfmask/rng.hpp"

namespace grfmask {

inline constexpr std::size_t kUnboundedHops = std::numeric_limits<std::size_t>::max();

// One terminating random walk. nodes[0] is the start; nodes.size() = hops + 1.
// departure_degrees[t] is the degree of nodes[t] when hop t+1 was taken.
struct Walk {
  std::vector<NodeId> nodes;
  std::vector<std::uint32_t> departure_degrees;
  double p_halt = 1.0;

  std::size_t hops() const { return nodes.size() - 1; }
  NodeId start() const { return nodes.front(); }
};

// Halt-first simple random walk: before every hop, stop with probability p_halt;
// otherwise move to a uniform neighbor. Isolated nodes halt immediately. Walks
// are cut after max_hops hops.
Walk sample_walk(const WeightedGraph& g, NodeId start, double p_halt, PhiloxStream& stream,
                 std::size_t max_hops = kUnboundedHops);

// n_walks walks from `start`, walk k drawn from PhiloxStream(seed, start, k).
std::vector<Walk> sample_walks(const WeightedGraph& g, NodeId start, double p_halt, std::size_t n_walks,
                               std::uint64_t seed, std::size_t max_hops = kUnboundedHops);

// Builds a Walk from an explicit node sequence, recording departure degrees.
// Throws InvalidArgument when consecutive nodes are not adjacent.
Walk make_walk(const WeightedGraph& g, std::span<const NodeId> nodes, double p_halt);

// Probability that a sampled walk begins with the first `hops` hops of w:
// prod_t (1 - p_halt) / degree(nodes[t]). Excludes the final halt.
double prefix_probability(const Walk& w, std::size_t hops);

// Product of the weights of the first `hops` traversed edges (1 for hops = 0).
double edge_weight_product(const WeightedGraph& g, const Walk& w, std::size_t hops);

// Debug dump: `start: n0 n1 n2 ...` per walk.
void write_walk_dump(std::ostream& out, std::span<const Walk> walks);

}  // namespace grfmask
