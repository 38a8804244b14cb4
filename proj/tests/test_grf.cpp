#include <cmath>
#include <queue>
#include <sstream>

#include "doctest.h"
#include "grfmask/errors.hpp"
#include "grfmask/grf.hpp"
#include "grfmask/oracle.hpp"
#include "grfmask/parallel.hpp"
#include "grfmask/walks.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace grfmask;

namespace {

// Estimator written straight from its definition, one prefix at a time.
std::vector<double> reference_feature(const WeightedGraph& g, const std::vector<Walk>& walks,
                                      const CoefficientSeries& f, bool weighted) {
  std::vector<double> out(g.node_count(), 0.0);
  for (const auto& w : walks) {
    for (std::size_t t = 0; t <= std::min(w.hops(), f.i_max()); ++t) {
      const double term = weighted ? edge_weight_product(g, w, t) * f[t] / prefix_probability(w, t) : f[t];
      out[w.nodes[t]] += term;
    }
  }
  for (double& x : out) x /= static_cast<double>(walks.size());
  return out;
}

std::vector<std::size_t> hop_distances(const WeightedGraph& g, NodeId from) {
  std::vector<std::size_t> dist(g.node_count(), SIZE_MAX);
  std::queue<NodeId> q;
  dist[from] = 0;
  q.push(from);
  while (!q.empty()) {
    const NodeId u = q.front();
    q.pop();
    for (const auto& nb : g.neighbors(u)) {
      if (dist[nb.node] == SIZE_MAX) {
        dist[nb.node] = dist[u] + 1;
        q.push(nb.node);
      }
    }
  }
  return dist;
}

// Sample mean and standard error, per entry, of R Gram matrices.
struct Moments {
  DenseMatrix mean;
  DenseMatrix se;
};

template <class Draw>
Moments gram_moments(std::size_t n, std::size_t reps, Draw&& draw) {
  DenseMatrix sum(n, n);
  DenseMatrix sum_sq(n, n);
  for (std::size_t r = 0; r < reps; ++r) {
    const DenseMatrix gram = draw(r);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        sum(i, j) += gram(i, j);
        sum_sq(i, j) += gram(i, j) * gram(i, j);
      }
  }
  Moments m{DenseMatrix(n, n), DenseMatrix(n, n)};
  const double rd = static_cast<double>(reps);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double mean = sum(i, j) / rd;
      const double var = std::max(0.0, (sum_sq(i, j) - rd * mean * mean) / (rd - 1));
      m.mean(i, j) = mean;
      m.se(i, j) = std::sqrt(var / rd);
    }
  return m;
}

}  // namespace

TEST_CASE("sparse vector invariants") {
  using E = SparseVector::Entry;
  CHECK_NOTHROW(SparseVector(4, {E{0, 1.0}, E{3, -2.0}}));
  CHECK_THROWS_AS(SparseVector(4, {E{3, 1.0}, E{0, 1.0}}), InvalidArgument);
  CHECK_THROWS_AS(SparseVector(4, {E{1, 1.0}, E{1, 1.0}}), InvalidArgument);
  CHECK_THROWS_AS(SparseVector(4, {E{4, 1.0}}), IndexError);
  CHECK_THROWS_AS(SparseVector(4, {E{2, 0.0}}), InvalidArgument);
  SparseVector v(5, {E{1, 2.0}, E{4, 3.0}});
  CHECK(v.value_at(1) == 2.0);
  CHECK(v.value_at(2) == 0.0);
  CHECK(v.to_dense() == std::vector<double>{0, 2, 0, 0, 3});
}

TEST_CASE("gram_entry") {
  using E = SparseVector::Entry;
  SparseVector a(6, {E{0, 1.0}, E{2, 2.0}});
  SparseVector b(6, {E{1, 5.0}, E{3, 2.0}});
  CHECK(gram_entry(a, b) == 0.0);
  SparseVector e(6, {E{4, 1.7}});
  CHECK(gram_entry(e, e) == 1.7 * 1.7);
  CHECK_THROWS_AS(gram_entry(a, SparseVector(5)), ShapeError);

  testing::Gen gen(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t dim = gen.index(1, 60);
    auto make = [&] {
      std::vector<E> entries;
      for (NodeId i = 0; i < dim; ++i)
        if (gen.coin(0.3)) entries.push_back({i, gen.uniform(-1, 1)});
      return SparseVector(dim, entries);
    };
    auto x = make();
    auto y = make();
    double dense = 0.0;
    auto dx = x.to_dense();
    auto dy = y.to_dense();
    for (std::size_t i = 0; i < dim; ++i) dense += dx[i] * dy[i];
    CHECK(std::abs(gram_entry(x, y) - dense) <= 1e-14);
  }
}

TEST_CASE("constant f gives f0 on the start node") {
  testing::Gen gen(5);
  auto g = gen.graph(12, 0.3);
  for (NodeId i = 0; i < 12; ++i) {
    auto v = build_grf(g, i, {0.7}, 0.3, 25, 11);
    REQUIRE(v.nnz() == 1);
    CHECK(v.entries()[0].index == i);
    CHECK(v.entries()[0].value == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(build_adhoc_feature(g, i, {0.7}, 0.3, 25, 11) == v);
  }
  WeightedGraph empty(5, std::vector<Edge>{});
  auto set = build_grf_set(empty, {1.0, 2.0, 3.0}, 0.5, 10, 0);
  for (NodeId i = 0; i < 5; ++i) {
    REQUIRE(set.features[i].nnz() == 1);
    CHECK(set.features[i].value_at(i) == 1.0);
  }
}

TEST_CASE("hand-evaluated estimator on two nodes") {
  WeightedGraph g(2, std::vector<Edge>{{0, 1, 1.0}});
  FeatureAccumulator scratch(2);
  std::vector<NodeId> hop{0, 1};
  std::vector<NodeId> stay{0};
  std::vector<Walk> moved{make_walk(g, hop, 0.5)};
  auto v = feature_from_walks(g, moved, {0, 1}, true, scratch);
  CHECK(v.value_at(1) == 2.0);
  CHECK(v.value_at(0) == 0.0);
  std::vector<Walk> halted{make_walk(g, stay, 0.5)};
  CHECK(feature_from_walks(g, halted, {0, 1}, true, scratch).nnz() == 0);
  // both together average to 1 on node 1
  std::vector<Walk> both{make_walk(g, hop, 0.5), make_walk(g, stay, 0.5)};
  CHECK(feature_from_walks(g, both, {0, 1}, true, scratch).value_at(1) == 1.0);
}

TEST_CASE("property: estimator matches the prefix-by-prefix definition") {
  testing::Gen gen(6);
  for (int trial = 0; trial < 100; ++trial) {
    auto g = gen.signed_graph(gen.index(1, 15), 0.4);
    auto f = CoefficientSeries(gen.vector(gen.index(1, 6), -1, 1));
    const double p = gen.uniform(0.1, 0.9);
    const NodeId node = static_cast<NodeId>(gen.index(0, g.node_count() - 1));
    const std::size_t n_walks = gen.index(1, 30);
    auto walks = sample_walks(g, node, p, n_walks, trial, f.i_max());
    FeatureAccumulator scratch(g.node_count());
    for (bool weighted : {true, false}) {
      auto got = feature_from_walks(g, walks, f, weighted, scratch).to_dense();
      auto want = reference_feature(g, walks, f, weighted);
      for (std::size_t i = 0; i < want.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
    CHECK(build_grf(g, node, f, p, n_walks, trial) ==
          feature_from_walks(g, walks, f, true, scratch));
  }
}

TEST_CASE("property: support is within i_max hops") {
  testing::Gen gen(8);
  for (int trial = 0; trial < 40; ++trial) {
    auto g = normalize_degree(gen.graph(gen.index(2, 40), 0.1));
    auto f = CoefficientSeries(gen.vector(gen.index(1, 5), 0.1, 1));
    auto set = build_grf_set(g, f, 0.2, 20, trial);
    for (NodeId i = 0; i < g.node_count(); ++i) {
      auto dist = hop_distances(g, i);
      for (const auto& e : set.features[i].entries()) CHECK(dist[e.index] <= f.i_max());
      CHECK(set.features[i].value_at(i) != 0.0);
    }
  }
}

TEST_CASE("grf sets are identical for any worker count") {
  auto g = normalize_degree(build_grid_2d(9, 7));
  auto f = deconvolve(heat_coefficients(1.0, 6));
  const auto before = thread_count();
  set_thread_count(1);
  auto one = build_grf_set(g, f, 0.3, 17, 5);
  auto one_adhoc = build_grf_set(g, f, 0.3, 17, 5, GrfVariant::adhoc);
  set_thread_count(4);
  auto four = build_grf_set(g, f, 0.3, 17, 5);
  auto four_adhoc = build_grf_set(g, f, 0.3, 17, 5, GrfVariant::adhoc);
  auto again = build_grf_set(g, f, 0.3, 17, 5);
  set_thread_count(before);
  CHECK(one == four);
  CHECK(one == again);
  CHECK(one_adhoc == four_adhoc);
  CHECK_FALSE(one == build_grf_set(g, f, 0.3, 17, 6));
  for (NodeId i = 0; i < g.node_count(); ++i) CHECK(one.features[i] == build_grf(g, i, f, 0.3, 17, 5));
}

TEST_CASE("sampling argument checks") {
  auto g = build_cycle(4);
  CHECK_THROWS_AS(build_grf(g, 0, {1}, 0.5, 0, 0), InvalidArgument);
  CHECK_THROWS_AS(build_grf(g, 0, {1}, 0.0, 5, 0), InvalidArgument);
  CHECK_THROWS_AS(build_grf_set(g, {1}, 1.0, 5, 0), InvalidArgument);
  CHECK(parse_grf_variant("asymmetric-f1") == GrfVariant::asymmetric_f1);
  CHECK(to_string(GrfVariant::adhoc) == "adhoc");
  CHECK_THROWS_AS(parse_grf_variant("other"), InvalidArgument);
}

TEST_CASE("Monte Carlo: independent-ensemble Gram is unbiased on C4") {
  auto g = normalize_degree(build_cycle(4));
  auto f = deconvolve(heat_coefficients(1.0, 4));
  auto exact = dense_kernel(g, convolve_full(f, f));
  auto m = gram_moments(4, 40, [&](std::size_t r) {
    auto a = build_grf_set(g, f, 0.5, 20000, mix_seed(100, 2 * r));
    auto b = build_grf_set(g, f, 0.5, 20000, mix_seed(100, 2 * r + 1));
    return gram_matrix(a, b);
  });
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(m.mean(i, j) - exact(i, j)) <= 3 * m.se(i, j));
}

TEST_CASE("mean nnz per feature does not grow with N") {
  auto mean_nnz = [](std::size_t n) {
    auto g = normalize_degree(build_grid_1d(n));
    auto set = build_grf_set(g, CoefficientSeries(std::vector<double>(65, 1.0)), 0.5, 4, 3);
    double total = 0.0;
    for (const auto& v : set.features) total += static_cast<double>(v.nnz());
    return total / static_cast<double>(n);
  };
  const double small = mean_nnz(1024);
  const double large = mean_nnz(4096);
  CHECK(std::abs(small - large) <= 0.1 * large);
}

TEST_CASE("ad-hoc estimator: closed-form bias on a weighted edge") {
  const double w = 0.3;
  const double p = 0.5;
  WeightedGraph g(2, std::vector<Edge>{{0, 1, w}});
  const std::size_t n = 200000;
  auto adhoc = build_adhoc_feature(g, 0, {0, 1}, p, n, 1);
  auto grf = build_grf(g, 0, {0, 1}, p, n, 1);
  // one Bernoulli(1 - p) per walk
  const double se_adhoc = std::sqrt(p * (1 - p) / n);
  CHECK(std::abs(adhoc.value_at(1) - (1 - p)) <= 4 * se_adhoc);
  const double se_grf = se_adhoc * w / (1 - p);
  CHECK(std::abs(grf.value_at(1) - w) <= 4 * se_grf);
  CHECK(std::abs(adhoc.value_at(1) - w) > 20 * se_adhoc);
}

TEST_CASE("Monte Carlo: ad-hoc Gram is biased on an unweighted cycle") {
  auto g = build_cycle(4);
  auto f = deconvolve(heat_coefficients(1.0, 3));
  auto exact = dense_kernel(g, convolve_full(f, f));
  auto m = gram_moments(4, 30, [&](std::size_t r) {
    auto a = build_grf_set(g, f, 0.5, 20000, mix_seed(7, 2 * r), GrfVariant::adhoc);
    auto b = build_grf_set(g, f, 0.5, 20000, mix_seed(7, 2 * r + 1), GrfVariant::adhoc);
    return gram_matrix(a, b);
  });
  double worst = 0.0;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) worst = std::max(worst, std::abs(m.mean(i, j) - exact(i, j)) / m.se(i, j));
  CHECK(worst > 5.0);
}

TEST_CASE("permute_features matches walks relabelled through the permutation") {
  testing::Gen gen(13);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = gen.graph(gen.index(2, 15), 0.4);
    auto perm = gen.permutation(g.node_count());
    auto h = permute_nodes(g, perm);
    std::vector<NodeId> inverse(perm.size());
    for (NodeId i = 0; i < perm.size(); ++i) inverse[perm[i]] = i;
    auto f = CoefficientSeries(gen.vector(4, 0.1, 1));
    auto set = build_grf_set(g, f, 0.4, 12, trial);
    auto moved = permute_features(set, perm);
    FeatureAccumulator scratch(g.node_count());
    for (NodeId i = 0; i < h.node_count(); ++i) {
      std::vector<Walk> walks;
      for (const auto& w : sample_walks(g, perm[i], 0.4, 12, trial, f.i_max())) {
        std::vector<NodeId> mapped;
        for (NodeId u : w.nodes) mapped.push_back(inverse[u]);
        walks.push_back(make_walk(h, mapped, 0.4));
      }
      CHECK(feature_from_walks(h, walks, f, true, scratch) == moved.features[i]);
    }
  }
}

TEST_CASE("grf json dump") {
  auto set = build_grf_set(build_cycle(3), {1.0}, 0.5, 2, 9);
  std::ostringstream out;
  write_grf_json(out, set);
  auto doc = nlohmann::json::parse(out.str());
  CHECK(doc["config"]["n_walks"] == 2);
  CHECK(doc["config"]["variant"] == "symmetric");
  CHECK(doc["features"].size() == 3);
  CHECK(doc["features"][1][0][0] == 1);
  CHECK(doc["features"][1][0][1] == 1.0);
}
