#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "grfmask/feature_map.hpp"
#include "grfmask/graph.hpp"
#include "grfmask/series.hpp"
#include "json.hpp"

namespace grfmask {

// 2 exp(-t^2 n^3 / (2 (2n-1)^2 c^4)), unclamped.
double concentration_bound_raw(double t, std::size_t n, double c);
// The same, clamped to [0, 1].
double concentration_bound(double t, std::size_t n, double c);

// Smallest n >= 1 with concentration_bound(t, n, c) <= target_prob, searched
// upward from 1. Throws InfeasibleError past 1e9.
std::size_t min_walkers(double t, double target_prob, double c);

// n log(1 - (1 - delta)^{1/n}) / log(1 - p_halt): with probability >= 1 - delta
// all n walks are at most sparsity_bound / n hops long.
double sparsity_bound(std::size_t n, double p_halt, double delta);

struct ConcentrationConfig {
  NodeId node_i = 0;
  NodeId node_j = 1;
  double p_halt = 0.5;
  std::size_t n_walks = 10;
  std::vector<double> t_grid{0.1, 0.2, 0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 15.0};
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
  // Multiplies c before evaluating the bound. Values < 1 make the bound too
  // optimistic, which the validation predicate must catch.
  double c_scale = 1.0;
};

struct BoundCell {
  double t = 0.0;
  std::uint64_t exceedances = 0;
  double empirical_prob = 0.0;
  double theoretical_bound = 0.0;  // clamped
  double raw_bound = 0.0;
  // empirical_prob <= bound + 3 sqrt(bound (1 - bound) / trials)
  bool within_noise = false;
};

struct BoundReport {
  std::vector<BoundCell> cells;
  std::size_t trials = 0;
  double exact_entry = 0.0;  // (Phi Phi^T)_ij
  double c = 0.0;            // c_constant(f, g, p_halt) * c_scale
  ConcentrationConfig config;
  bool holds() const;
};

// Each trial draws independent ensembles for node_i and node_j (also when i = j)
// and records |phi_i^T phi_j - (Phi Phi^T)_ij| with f = deconvolve(alpha).
BoundReport empirical_concentration(const WeightedGraph& g, const CoefficientSeries& alpha,
                                    const ConcentrationConfig& config);

struct SparsityConfig {
  std::size_t n_walks = 4;
  double p_halt = 0.5;
  double delta = 0.05;
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
};

struct SparsityReport {
  double b = 0.0;          // sparsity_bound / n
  double threshold = 0.0;  // 1 + n b
  std::size_t trials = 0;
  std::size_t exceedances = 0;  // features with nnz > threshold
  double fraction = 0.0;
  double allowed = 0.0;  // delta + 3 sqrt(delta / trials)
  double mean_nnz = 0.0;
  std::size_t max_nnz = 0;
  SparsityConfig config;
  bool holds() const { return fraction <= allowed; }
};

// Trial r samples the GRF of node r mod N from ensemble r / N.
SparsityReport empirical_sparsity(const WeightedGraph& g, const CoefficientSeries& f,
                                  const SparsityConfig& config);

// FLOP model. Dense (a x b)(b x c) product = 2abc, exp = 1, sparse MAC = 2.
double softmax_flops(std::size_t n, std::size_t d);
double linear_flops(std::size_t n, std::size_t m, std::size_t d);
std::string flop_model_description();

struct FlopConfig {
  std::string graph_family = "grid-1d";
  std::vector<std::size_t> sizes{256, 512, 1024, 2048};
  std::size_t n_walks = 4;
  double p_halt = 0.5;
  std::size_t d = 8;
  std::size_t m = 8;
  CoefficientSeries f = deconvolve(heat_coefficients(1.0, 10));
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  FeatureMapKind kind = FeatureMapKind::relu;
};

struct FlopRow {
  std::string variant;  // softmax | linear | grf-masked
  std::size_t n_nodes = 0;
  double flops_mean = 0.0;
  double flops_std = 0.0;
  std::size_t seeds = 0;
};

struct FlopReport {
  std::vector<FlopRow> rows;
  FlopConfig config;
  // Rows of one variant in ascending N.
  std::vector<FlopRow> variant_rows(const std::string& variant) const;
};

// grf-masked counts the MACs actually executed by masked_linear_attention_grf on a
// degree-normalized grid with random Q, K, V; one GRF ensemble per seed.
FlopReport flop_experiment(const FlopConfig& config);

// Coefficient of determination of the least-squares line y ~ a + b x.
double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y);

void write_bound_csv(std::ostream& out, const BoundReport& report);
void write_flop_csv(std::ostream& out, const FlopReport& report);
nlohmann::ordered_json to_json(const BoundReport& report);
nlohmann::ordered_json to_json(const SparsityReport& report);
nlohmann::ordered_json to_json(const FlopReport& report);

}  // namespace grfmask
