#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace grfmask {

using NodeId = std::uint32_t;

struct Neighbor {
  NodeId node;
  double weight;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct Edge {
  NodeId u;
  NodeId v;
  double weight;
};

// Undirected weighted graph with symmetric adjacency W. Nodes are 0..N-1.
// Immutable once built; the constructor enforces symmetry, sorted and unique
// neighbor lists, nonzero finite weights and no self-loops.
class WeightedGraph {
 public:
  WeightedGraph() = default;
  // Each undirected edge appears once in `edges` (either orientation).
  WeightedGraph(std::size_t n_nodes, std::span<const Edge> edges);

  std::size_t node_count() const { return adjacency_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  std::size_t degree(NodeId i) const { return adjacency_[i].size(); }
  std::size_t max_degree() const;
  std::span<const Neighbor> neighbors(NodeId i) const { return adjacency_[i]; }
  // Weight of edge (i, j), or nullopt when absent.
  std::optional<double> weight(NodeId i, NodeId j) const;
  // Every undirected edge once with u < v, in (u, v) order.
  std::vector<Edge> edges() const;

  friend bool operator==(const WeightedGraph&, const WeightedGraph&) = default;

 private:
  std::vector<std::vector<Neighbor>> adjacency_;
  std::size_t edge_count_ = 0;
};

WeightedGraph build_grid_1d(std::size_t n);
// Row-major: node (x, y) has index y * nx + x.
WeightedGraph build_grid_2d(std::size_t nx, std::size_t ny);
// Exact Euclidean kNN, symmetrized by union, unit weights. Ties go to the lower index.
WeightedGraph build_knn(std::span<const std::array<double, 3>> points, std::size_t k);
WeightedGraph build_cycle(std::size_t n);

// w_ij <- 1 / sqrt(d_i d_j).
WeightedGraph normalize_degree(const WeightedGraph& g);
WeightedGraph scale_weights(const WeightedGraph& g, double s);
// Node i of the result is node perm[i] of g: result edge (i, j) exists iff g
// has edge (perm[i], perm[j]).
WeightedGraph permute_nodes(const WeightedGraph& g, std::span<const NodeId> perm);

// Edge-list text format: a header line `N M`, then M lines `i j w` with i < j.
void write_edge_list(std::ostream& out, const WeightedGraph& g);
WeightedGraph read_edge_list(std::istream& in);
void save_edge_list(const std::string& path, const WeightedGraph& g);
WeightedGraph load_edge_list(const std::string& path);

// Whitespace-separated `x y z` per line.
std::vector<std::array<double, 3>> load_points(const std::string& path);

}  // namespace grfmask
