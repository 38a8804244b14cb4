#include <cmath>
#include <sstream>

#include "doctest.h"
#include "grfmask/analysis.hpp"
#include "grfmask/errors.hpp"
#include "grfmask/parallel.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace grfmask;

TEST_CASE("concentration bound values") {
  CHECK(concentration_bound_raw(1, 1, 1) == doctest::Approx(2 * std::exp(-0.5)));
  CHECK(concentration_bound_raw(1, 1, 1) == doctest::Approx(1.2131).epsilon(1e-4));
  CHECK(concentration_bound(1, 1, 1) == 1.0);
  CHECK(concentration_bound(2, 1, 1) == doctest::Approx(0.2707).epsilon(1e-4));
  CHECK(concentration_bound(1e6, 1, 1) == 0.0);
  CHECK_THROWS_AS(concentration_bound(0, 1, 1), InvalidArgument);
  CHECK_THROWS_AS(concentration_bound(1, 0, 1), InvalidArgument);
  CHECK_THROWS_AS(concentration_bound(1, 1, 0), InvalidArgument);
}

TEST_CASE("property: the bound falls with t and with n") {
  // n = 1 gives exponent 1 and n = 2 gives 8/9; from there on it grows
  for (std::size_t n = 2; n < 500; ++n) {
    const double a = std::pow(n, 3) / std::pow(2.0 * n - 1, 2);
    const double b = std::pow(n + 1.0, 3) / std::pow(2.0 * n + 1, 2);
    CHECK(b > a);
  }
  testing::Gen gen(1);
  for (int trial = 0; trial < 300; ++trial) {
    const double t = gen.uniform(0.01, 5);
    const double c = gen.uniform(0.5, 3);
    const std::size_t n = gen.index(2, 200);
    const double here = concentration_bound_raw(t, n, c);
    CHECK(concentration_bound_raw(t * 1.1, n, c) <= here);
    CHECK(concentration_bound_raw(t, n + 1, c) <= here);
    if (here > 1e-250) {  // strict until the exponential underflows
      CHECK(concentration_bound_raw(t * 1.1, n, c) < here);
      CHECK(concentration_bound_raw(t, n + 1, c) < here);
    }
  }
}

TEST_CASE("min_walkers") {
  CHECK(min_walkers(0.5, 0.1, 1.0) == 95);
  CHECK(concentration_bound(0.5, 94, 1.0) > 0.1);
  CHECK(min_walkers(1e3, 0.1, 1.0) == 1);
  // against a plain upward scan
  for (int trial = 0; trial < 50; ++trial) {
    const double t = trial < 25 ? 0.2 + 0.05 * trial : 1.0;
    const double target = trial < 25 ? 0.05 : 0.01 + 0.03 * (trial - 25);
    std::size_t scan = 1;
    while (concentration_bound(t, scan, 1.0) > target) ++scan;
    CHECK(min_walkers(t, target, 1.0) == scan);
  }
  testing::Gen gen(2);
  for (int trial = 0; trial < 50; ++trial) {
    const double t = gen.uniform(0.3, 2);
    const double target = gen.uniform(0.01, 0.5);
    const double c = gen.uniform(0.5, 1.5);
    CHECK(min_walkers(t, target, c * std::pow(2.0, 0.25)) >= min_walkers(t, target, c));
  }
  CHECK_THROWS_AS(min_walkers(1e-9, 0.01, 10.0), InfeasibleError);
  CHECK_THROWS_AS(min_walkers(1, 0.0, 1), InvalidArgument);
}

TEST_CASE("sparsity bound") {
  CHECK(sparsity_bound(4, 0.5, 0.05) == doctest::Approx(25.18).epsilon(0.01 / 25.18));
  CHECK(sparsity_bound(4, 0.5, 0.05) / 4 == doctest::Approx(6.29).epsilon(0.01 / 6.29));
  CHECK(sparsity_bound(1, 0.5, 0.5) == doctest::Approx(1.0));
  CHECK(sparsity_bound(4, 0.999999, 0.05) < sparsity_bound(4, 0.9, 0.05));
  CHECK(sparsity_bound(4, 1 - 1e-12, 0.05) < 1.0);  // walks almost surely stop at once
  CHECK_THROWS_AS(sparsity_bound(0, 0.5, 0.05), InvalidArgument);
  CHECK_THROWS_AS(sparsity_bound(4, 1.0, 0.05), InvalidArgument);
}

TEST_CASE("property: b is a geometric tail quantile") {
  testing::Gen gen(3);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = gen.index(1, 64);
    const double p = gen.uniform(0.01, 0.99);
    const double delta = gen.uniform(0.001, 0.5);
    const double b = sparsity_bound(n, p, delta) / static_cast<double>(n);
    CHECK(std::pow(1 - p, std::ceil(b)) <= 1 - std::pow(1 - delta, 1.0 / n) + 1e-12);
  }
}

TEST_CASE("empirical concentration holds and is reproducible") {
  auto g = normalize_degree(build_cycle(4));
  auto alpha = heat_coefficients(1.0, 4);
  ConcentrationConfig config;
  config.trials = 2000;
  auto report = empirical_concentration(g, alpha, config);
  CHECK(report.holds());
  CHECK(report.cells.size() == 10);
  for (const auto& cell : report.cells) {
    CHECK(cell.empirical_prob >= 0.0);
    CHECK(cell.empirical_prob <= 1.0);
    CHECK(cell.theoretical_bound <= 1.0);
    CHECK(cell.theoretical_bound == std::min(1.0, cell.raw_bound));
  }
  const auto f = deconvolve(alpha);
  CHECK(report.c == doctest::Approx(c_constant(f, g, 0.5)));
  const auto before = thread_count();
  set_thread_count(4);
  auto again = empirical_concentration(g, alpha, config);
  set_thread_count(before);
  std::ostringstream a, b;
  write_bound_csv(a, report);
  write_bound_csv(b, again);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("t,empirical,bound\n", 0) == 0);
}

TEST_CASE("a shrunken c is caught") {
  auto g = normalize_degree(build_cycle(4));
  ConcentrationConfig config;
  config.trials = 2000;
  config.c_scale = 0.1;
  CHECK_FALSE(empirical_concentration(g, heat_coefficients(1.0, 4), config).holds());
}

TEST_CASE("empirical concentration argument checks") {
  auto g = build_cycle(4);
  ConcentrationConfig config;
  config.trials = 0;
  CHECK_THROWS_AS(empirical_concentration(g, {1}, config), InvalidArgument);
  config.trials = 10;
  config.t_grid = {0.0, 1.0};
  CHECK_THROWS_AS(empirical_concentration(g, {1}, config), InvalidArgument);
  config.t_grid = {1.0};
  config.node_j = 9;
  CHECK_THROWS_AS(empirical_concentration(g, {1}, config), IndexError);
  config.node_j = 1;
  CHECK_THROWS_AS(empirical_concentration(g, {0, 1}, config), SeriesError);
}

TEST_CASE("empirical sparsity on a short run") {
  auto g = normalize_degree(build_grid_1d(256));
  SparsityConfig config;
  config.trials = 2000;
  auto report = empirical_sparsity(g, CoefficientSeries(std::vector<double>(65, 1.0)), config);
  CHECK(report.threshold == doctest::Approx(1 + 4 * report.b));
  CHECK(report.holds());
  CHECK(report.max_nnz >= 1);
  CHECK(report.mean_nnz >= 1.0);
}

TEST_CASE("flop model") {
  CHECK(softmax_flops(2, 3) == 2 * 4 * 3 + 4 + 2 * 4 * 3 + 4 + 2);
  CHECK(linear_flops(2, 3, 4) == 4 * 2 * 3 * 4 + 2 * 2 * 3 + 2 * 4 + 2);
  CHECK(softmax_flops(512, 8) / softmax_flops(256, 8) == doctest::Approx(4.0).epsilon(0.01));
  const double r = linear_flops(512, 8, 8) / linear_flops(256, 8, 8);
  CHECK(r >= 1.9);
  CHECK(r <= 2.1);
}

TEST_CASE("flop experiment") {
  FlopConfig config;
  config.sizes = {128, 256};
  config.seeds = {0, 1, 2};
  auto report = flop_experiment(config);
  CHECK(report.rows.size() == 6);
  for (const auto& row : report.rows) CHECK(row.flops_mean > 0.0);
  auto grf = report.variant_rows("grf-masked");
  REQUIRE(grf.size() == 2);
  CHECK(grf[0].seeds == 3);
  CHECK(grf[0].flops_std > 0.0);
  auto again = flop_experiment(config);
  std::ostringstream a, b;
  write_flop_csv(a, report);
  write_flop_csv(b, again);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("variant,n_nodes,flops_mean,flops_std,seeds\n", 0) == 0);
  auto doc = to_json(report);
  CHECK(doc.contains("flop_model"));

  config.sizes = {256, 128};
  CHECK_THROWS_AS(flop_experiment(config), InvalidArgument);
  config.sizes = {128};
  config.graph_family = "grid-2d";
  CHECK_THROWS_AS(flop_experiment(config), InvalidArgument);
}

TEST_CASE("linear fit r2") {
  CHECK(linear_fit_r2({1, 2, 3}, {2, 4, 6}) == doctest::Approx(1.0));
  CHECK(linear_fit_r2({1, 2, 3, 4}, {1, 3, 2, 4}) == doctest::Approx(0.64));
  CHECK_THROWS_AS(linear_fit_r2({1}, {1}), InvalidArgument);
}
