#include "grfmask/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "grfmask/attention.hpp"
#include "grfmask/errors.hpp"
#include "grfmask/grf.hpp"
#include "grfmask/oracle.hpp"
#include "grfmask/parallel.hpp"
#include "grfmask/rng.hpp"

namespace grfmask {

double concentration_bound_raw(double t, std::size_t n, double c) {
  if (!(t > 0.0) || n == 0 || !(c > 0.0)) throw InvalidArgument("concentration_bound: need t > 0, n >= 1, c > 0");
  const double nn = static_cast<double>(n);
  const double spread = 2.0 * nn - 1.0;
  return 2.0 * std::exp(-(t * t * nn * nn * nn) / (2.0 * spread * spread * std::pow(c, 4)));
}

double concentration_bound(double t, std::size_t n, double c) {
  return std::min(1.0, concentration_bound_raw(t, n, c));
}

std::size_t min_walkers(double t, double target_prob, double c) {
  if (!(target_prob > 0.0 && target_prob < 1.0)) throw InvalidArgument("min_walkers: target must be in (0, 1)");
  constexpr std::size_t kCap = 1'000'000'000;
  auto ok = [&](std::size_t n) { return concentration_bound(t, n, c) <= target_prob; };
  if (ok(1)) return 1;
  // n^3 / (2n - 1)^2 dips from n = 1 to n = 2 and increases from there on, so the
  // bound is monotone for n >= 2 and bisection finds the first passing n
  std::size_t hi = 2;
  while (!ok(hi)) {
    if (hi >= kCap) throw InfeasibleError("min_walkers: no n <= 1e9 meets the target probability");
    hi = std::min(kCap, hi * 2);
  }
  std::size_t lo = std::max<std::size_t>(2, hi / 2);
  if (ok(lo)) return lo;
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

double sparsity_bound(std::size_t n, double p_halt, double delta) {
  if (n == 0 || !(p_halt > 0.0 && p_halt < 1.0) || !(delta > 0.0 && delta < 1.0)) {
    throw InvalidArgument("sparsity_bound: need n >= 1 and p_halt, delta in (0, 1)");
  }
  const double nn = static_cast<double>(n);
  return nn * std::log(1.0 - std::pow(1.0 - delta, 1.0 / nn)) / std::log(1.0 - p_halt);
}

bool BoundReport::holds() const {
  return std::all_of(cells.begin(), cells.end(), [](const BoundCell& c) { return c.within_noise; });
}

BoundReport empirical_concentration(const WeightedGraph& g, const CoefficientSeries& alpha,
                                    const ConcentrationConfig& config) {
  if (config.trials == 0) throw InvalidArgument("empirical_concentration: trials must be >= 1");
  if (config.node_i >= g.node_count() || config.node_j >= g.node_count()) {
    throw IndexError("empirical_concentration: node pair out of range");
  }
  for (double t : config.t_grid) {
    if (!(t > 0.0)) throw InvalidArgument("empirical_concentration: t grid must be strictly positive");
  }
  const CoefficientSeries f = deconvolve(alpha);
  const DenseMatrix exact = dense_kernel(g, convolve_full(f, f));

  BoundReport report;
  report.config = config;
  report.trials = config.trials;
  report.exact_entry = exact(config.node_i, config.node_j);
  report.c = c_constant(f, g, config.p_halt) * config.c_scale;

  std::vector<double> deviation(config.trials);
  parallel_for(config.trials, [&](std::size_t r, std::size_t) {
    const auto a = build_grf(g, config.node_i, f, config.p_halt, config.n_walks, mix_seed(config.seed, 2 * r));
    const auto b = build_grf(g, config.node_j, f, config.p_halt, config.n_walks, mix_seed(config.seed, 2 * r + 1));
    deviation[r] = std::abs(gram_entry(a, b) - report.exact_entry);
  });

  const double trials = static_cast<double>(config.trials);
  for (double t : config.t_grid) {
    BoundCell cell;
    cell.t = t;
    cell.exceedances = static_cast<std::uint64_t>(
        std::count_if(deviation.begin(), deviation.end(), [t](double x) { return x > t; }));
    cell.empirical_prob = static_cast<double>(cell.exceedances) / trials;
    cell.raw_bound = concentration_bound_raw(t, config.n_walks, report.c);
    cell.theoretical_bound = std::min(1.0, cell.raw_bound);
    const double bound = cell.theoretical_bound;
    cell.within_noise = cell.empirical_prob <= bound + 3.0 * std::sqrt(bound * (1.0 - bound) / trials);
    report.cells.push_back(cell);
  }
  return report;
}

SparsityReport empirical_sparsity(const WeightedGraph& g, const CoefficientSeries& f,
                                  const SparsityConfig& config) {
  if (config.trials == 0) throw InvalidArgument("empirical_sparsity: trials must be >= 1");
  if (g.node_count() == 0) throw InvalidArgument("empirical_sparsity: empty graph");
  SparsityReport report;
  report.config = config;
  report.trials = config.trials;
  report.b = sparsity_bound(config.n_walks, config.p_halt, config.delta) / static_cast<double>(config.n_walks);
  report.threshold = 1.0 + static_cast<double>(config.n_walks) * report.b;
  report.allowed = config.delta + 3.0 * std::sqrt(config.delta / static_cast<double>(config.trials));

  const std::size_t n = g.node_count();
  std::vector<std::size_t> nnz(config.trials);
  parallel_for(config.trials, [&](std::size_t r, std::size_t) {
    const auto node = static_cast<NodeId>(r % n);
    nnz[r] = build_grf(g, node, f, config.p_halt, config.n_walks, mix_seed(config.seed, r / n)).nnz();
  });
  for (std::size_t count : nnz) {
    if (static_cast<double>(count) > report.threshold) ++report.exceedances;
    report.max_nnz = std::max(report.max_nnz, count);
  }
  report.fraction = static_cast<double>(report.exceedances) / static_cast<double>(config.trials);
  report.mean_nnz = static_cast<double>(std::accumulate(nnz.begin(), nnz.end(), std::size_t{0})) /
                    static_cast<double>(config.trials);
  return report;
}

double softmax_flops(std::size_t n, std::size_t d) {
  const double nn = static_cast<double>(n);
  const double dd = static_cast<double>(d);
  return 2.0 * nn * nn * dd + nn * nn + 2.0 * nn * nn * dd + nn * nn + nn;
}

double linear_flops(std::size_t n, std::size_t m, std::size_t d) {
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  const double dd = static_cast<double>(d);
  return 2.0 * 2.0 * nn * mm * dd + 2.0 * nn * mm + nn * dd + nn;
}

std::string flop_model_description() {
  return "dense (a x b)(b x c) product = 2abc; exp = 1; sparse multiply-accumulate = 2; "
         "softmax = 2N^2d + N^2 + 2N^2d + N^2 + N; linear = 2*2Nmd + 2Nm + Nd + N; "
         "grf-masked = 2 * executed MACs of the sparse factored contraction + Nd + N "
         "(walk sampling excluded)";
}

std::vector<FlopRow> FlopReport::variant_rows(const std::string& variant) const {
  std::vector<FlopRow> out;
  std::copy_if(rows.begin(), rows.end(), std::back_inserter(out),
               [&](const FlopRow& r) { return r.variant == variant; });
  std::sort(out.begin(), out.end(), [](const FlopRow& a, const FlopRow& b) { return a.n_nodes < b.n_nodes; });
  return out;
}

namespace {

DenseMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, std::uint32_t tag) {
  PhiloxStream stream(seed, tag, 0);
  DenseMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = 2.0 * stream.uniform() - 1.0;
  }
  return m;
}

}  // namespace

FlopReport flop_experiment(const FlopConfig& config) {
  if (config.graph_family != "grid-1d") throw InvalidArgument("flop_experiment: only grid-1d is supported");
  if (config.m != config.d) throw InvalidArgument("flop_experiment: elementwise feature maps need m == d");
  if (config.seeds.empty()) throw InvalidArgument("flop_experiment: at least one seed required");
  if (config.sizes.empty()) throw InvalidArgument("flop_experiment: at least one size required");
  for (std::size_t s = 0; s < config.sizes.size(); ++s) {
    if (config.sizes[s] == 0) throw InvalidArgument("flop_experiment: sizes must be >= 1");
    if (s > 0 && config.sizes[s] <= config.sizes[s - 1]) throw InvalidArgument("flop_experiment: sizes must ascend");
  }
  FlopReport report;
  report.config = config;
  for (std::size_t n : config.sizes) {
    report.rows.push_back({"softmax", n, softmax_flops(n, config.d), 0.0, 1});
    report.rows.push_back({"linear", n, linear_flops(n, config.m, config.d), 0.0, 1});
    const WeightedGraph g = normalize_degree(build_grid_1d(n));
    std::vector<double> counts;
    for (std::uint64_t seed : config.seeds) {
      const DenseMatrix q = random_matrix(n, config.d, seed, 0);
      const DenseMatrix k = random_matrix(n, config.d, seed, 1);
      const DenseMatrix v = random_matrix(n, config.d, seed, 2);
      const GrfSet grfs = build_grf_set(g, config.f, config.p_halt, config.n_walks, mix_seed(seed, 3));
      OpCounter counter;
      masked_linear_attention_grf(q, k, v, grfs, config.kind, &counter);
      counts.push_back(2.0 * static_cast<double>(counter.macs) + static_cast<double>(n * config.d + n));
    }
    const double mean = std::accumulate(counts.begin(), counts.end(), 0.0) / static_cast<double>(counts.size());
    double var = 0.0;
    for (double c : counts) var += (c - mean) * (c - mean);
    const double sd = counts.size() > 1 ? std::sqrt(var / static_cast<double>(counts.size() - 1)) : 0.0;
    report.rows.push_back({"grf-masked", n, mean, sd, counts.size()});
  }
  return report;
}

double linear_fit_r2(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("linear_fit_r2: need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (syy == 0.0) return 1.0;
  return (sxy * sxy) / (sxx * syy);
}

void write_bound_csv(std::ostream& out, const BoundReport& report) {
  out << "t,empirical,bound\n";
  for (const auto& c : report.cells) {
    out << format_double(c.t) << ',' << format_double(c.empirical_prob) << ','
        << format_double(c.theoretical_bound) << '\n';
  }
}

void write_flop_csv(std::ostream& out, const FlopReport& report) {
  out << "variant,n_nodes,flops_mean,flops_std,seeds\n";
  for (const auto& r : report.rows) {
    out << r.variant << ',' << r.n_nodes << ',' << format_double(r.flops_mean) << ','
        << format_double(r.flops_std) << ',' << r.seeds << '\n';
  }
}

nlohmann::ordered_json to_json(const BoundReport& report) {
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const auto& c : report.cells) {
    cells.push_back({{"t", c.t},
                     {"exceedances", c.exceedances},
                     {"empirical", c.empirical_prob},
                     {"bound", c.theoretical_bound},
                     {"bound_raw", c.raw_bound},
                     {"within_noise", c.within_noise}});
  }
  return {{"node_pair", {report.config.node_i, report.config.node_j}},
          {"n_walks", report.config.n_walks},
          {"p_halt", report.config.p_halt},
          {"trials", report.trials},
          {"seed", report.config.seed},
          {"c", report.c},
          {"c_scale", report.config.c_scale},
          {"exact_entry", report.exact_entry},
          {"holds", report.holds()},
          {"cells", cells}};
}

nlohmann::ordered_json to_json(const SparsityReport& report) {
  return {{"n_walks", report.config.n_walks},
          {"p_halt", report.config.p_halt},
          {"delta", report.config.delta},
          {"trials", report.trials},
          {"seed", report.config.seed},
          {"b", report.b},
          {"threshold", report.threshold},
          {"exceedances", report.exceedances},
          {"fraction", report.fraction},
          {"allowed", report.allowed},
          {"mean_nnz", report.mean_nnz},
          {"max_nnz", report.max_nnz},
          {"holds", report.holds()}};
}

nlohmann::ordered_json to_json(const FlopReport& report) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"variant", r.variant},
                    {"n_nodes", r.n_nodes},
                    {"flops_mean", r.flops_mean},
                    {"flops_std", r.flops_std},
                    {"seeds", r.seeds}});
  }
  return {{"flop_model", flop_model_description()}, {"rows", rows}};
}

}  // namespace grfmask
