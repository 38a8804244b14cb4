#include "grfmask/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "grfmask/errors.hpp"

namespace grfmask {

WeightedGraph::WeightedGraph(std::size_t n_nodes, std::span<const Edge> edges)
    : adjacency_(n_nodes) {
  if (n_nodes > UINT32_MAX) throw InvalidArgument("graph: too many nodes");
  for (const Edge& e : edges) {
    if (e.u >= n_nodes || e.v >= n_nodes) {
      throw InvalidArgument("graph: edge endpoint out of range");
    }
    if (e.u == e.v) throw InvalidArgument("graph: self-loop on node " + std::to_string(e.u));
    if (!std::isfinite(e.weight) || e.weight == 0.0) {
      throw InvalidArgument("graph: edge weight must be finite and nonzero");
    }
    adjacency_[e.u].push_back({e.v, e.weight});
    adjacency_[e.v].push_back({e.u, e.weight});
  }
  for (auto& list : adjacency_) {
    std::sort(list.begin(), list.end(),
              [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
    for (std::size_t k = 1; k < list.size(); ++k) {
      if (list[k].node == list[k - 1].node) throw InvalidArgument("graph: duplicate edge");
    }
  }
  edge_count_ = edges.size();
}

std::size_t WeightedGraph::max_degree() const {
  std::size_t best = 0;
  for (const auto& list : adjacency_) best = std::max(best, list.size());
  return best;
}

std::optional<double> WeightedGraph::weight(NodeId i, NodeId j) const {
  const auto& list = adjacency_.at(i);
  auto it = std::lower_bound(list.begin(), list.end(), j,
                             [](const Neighbor& a, NodeId key) { return a.node < key; });
  if (it == list.end() || it->node != j) return std::nullopt;
  return it->weight;
}

std::vector<Edge> WeightedGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (NodeId i = 0; i < adjacency_.size(); ++i) {
    for (const Neighbor& nb : adjacency_[i]) {
      if (i < nb.node) out.push_back({i, nb.node, nb.weight});
    }
  }
  return out;
}

WeightedGraph build_grid_1d(std::size_t n) {
  if (n == 0) throw InvalidArgument("grid1d: n must be >= 1");
  std::vector<Edge> edges;
  edges.reserve(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(i + 1), 1.0});
  }
  return WeightedGraph(n, edges);
}

WeightedGraph build_grid_2d(std::size_t nx, std::size_t ny) {
  if (nx == 0 || ny == 0) throw InvalidArgument("grid2d: dimensions must be >= 1");
  std::vector<Edge> edges;
  auto id = [nx](std::size_t x, std::size_t y) { return static_cast<NodeId>(y * nx + x); };
  for (std::size_t y = 0; y < ny; ++y) {
    for (std::size_t x = 0; x < nx; ++x) {
      if (x + 1 < nx) edges.push_back({id(x, y), id(x + 1, y), 1.0});
      if (y + 1 < ny) edges.push_back({id(x, y), id(x, y + 1), 1.0});
    }
  }
  return WeightedGraph(nx * ny, edges);
}

WeightedGraph build_cycle(std::size_t n) {
  if (n < 3) throw InvalidArgument("cycle: n must be >= 3");
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>((i + 1) % n), 1.0});
  }
  return WeightedGraph(n, edges);
}

WeightedGraph build_knn(std::span<const std::array<double, 3>> points, std::size_t k) {
  const std::size_t n = points.size();
  if (k == 0 || k >= n) throw InvalidArgument("knn: k must satisfy 1 <= k < number of points");
  auto dist2 = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (int c = 0; c < 3; ++c) {
      const double d = points[a][c] - points[b][c];
      s += d * d;
    }
    return s;
  };
  std::vector<std::vector<NodeId>> linked(n);
  std::vector<std::pair<double, NodeId>> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    candidates.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = dist2(i, j);
      if (d == 0.0) throw AmbiguityError("knn: duplicate points " + std::to_string(std::min(i, j)) +
                                         " and " + std::to_string(std::max(i, j)));
      candidates.emplace_back(d, static_cast<NodeId>(j));
    }
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                      candidates.end());
    for (std::size_t r = 0; r < k; ++r) {
      const NodeId j = candidates[r].second;
      linked[std::min<std::size_t>(i, j)].push_back(static_cast<NodeId>(std::max<std::size_t>(i, j)));
    }
  }
  std::vector<Edge> edges;
  for (NodeId i = 0; i < n; ++i) {
    auto& list = linked[i];
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    for (NodeId j : list) edges.push_back({i, j, 1.0});
  }
  return WeightedGraph(n, edges);
}

WeightedGraph normalize_degree(const WeightedGraph& g) {
  std::vector<Edge> edges = g.edges();
  for (Edge& e : edges) {
    e.weight = 1.0 / std::sqrt(static_cast<double>(g.degree(e.u)) * static_cast<double>(g.degree(e.v)));
  }
  return WeightedGraph(g.node_count(), edges);
}

WeightedGraph scale_weights(const WeightedGraph& g, double s) {
  if (!std::isfinite(s) || s == 0.0) throw InvalidArgument("scale_weights: s must be finite and nonzero");
  std::vector<Edge> edges = g.edges();
  for (Edge& e : edges) e.weight *= s;
  return WeightedGraph(g.node_count(), edges);
}

WeightedGraph permute_nodes(const WeightedGraph& g, std::span<const NodeId> perm) {
  const std::size_t n = g.node_count();
  if (perm.size() != n) throw ShapeError("permute_nodes: permutation size mismatch");
  std::vector<NodeId> inverse(n, UINT32_MAX);
  for (NodeId i = 0; i < n; ++i) {
    if (perm[i] >= n || inverse[perm[i]] != UINT32_MAX) {
      throw InvalidArgument("permute_nodes: not a permutation");
    }
    inverse[perm[i]] = i;
  }
  std::vector<Edge> edges = g.edges();
  for (Edge& e : edges) {
    e.u = inverse[e.u];
    e.v = inverse[e.v];
  }
  return WeightedGraph(n, edges);
}

void write_edge_list(std::ostream& out, const WeightedGraph& g) {
  out << g.node_count() << ' ' << g.edge_count() << '\n';
  char buffer[64];
  for (const Edge& e : g.edges()) {
    std::snprintf(buffer, sizeof buffer, "%.17g", e.weight);
    out << e.u << ' ' << e.v << ' ' << buffer << '\n';
  }
}

WeightedGraph read_edge_list(std::istream& in) {
  long long n = -1;
  long long m = -1;
  if (!(in >> n >> m) || n < 0 || m < 0) throw IoError("edge list: malformed header");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (long long r = 0; r < m; ++r) {
    long long i = -1;
    long long j = -1;
    double w = 0.0;
    if (!(in >> i >> j >> w)) throw IoError("edge list: expected " + std::to_string(m) + " edges");
    if (i < 0 || j < 0 || i >= n || j >= n) throw IoError("edge list: node index out of range");
    if (i == j) throw IoError("edge list: self-loop on node " + std::to_string(i));
    edges.push_back({static_cast<NodeId>(i), static_cast<NodeId>(j), w});
  }
  std::string trailing;
  if (in >> trailing) throw IoError("edge list: trailing content after " + std::to_string(m) + " edges");
  try {
    return WeightedGraph(static_cast<std::size_t>(n), edges);
  } catch (const InvalidArgument& e) {
    throw IoError(std::string("edge list: ") + e.what());
  }
}

void save_edge_list(const std::string& path, const WeightedGraph& g) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_edge_list(out, g);
  if (!out) throw IoError("failed writing " + path);
}

WeightedGraph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_edge_list(in);
}

std::vector<std::array<double, 3>> load_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::array<double, 3>> points;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream row(line);
    std::array<double, 3> p{};
    if (!(row >> p[0] >> p[1] >> p[2])) throw IoError("points: malformed line '" + line + "'");
    points.push_back(p);
  }
  return points;
}

}  // namespace grfmask
