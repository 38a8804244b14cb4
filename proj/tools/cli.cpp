#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "grfmask/analysis.hpp"
#include "grfmask/attention.hpp"
#include "grfmask/errors.hpp"
#include "grfmask/graph.hpp"
#include "grfmask/grf.hpp"
#include "grfmask/oracle.hpp"
#include "grfmask/parallel.hpp"
#include "grfmask/rng.hpp"
#include "grfmask/series.hpp"
#include "grfmask/walks.hpp"
#include "json.hpp"

namespace grfmask::cli {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class ValidationFailure : public Error {
 public:
  using Error::Error;
};

// ---- config helpers -------------------------------------------------------

void require_object(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
}

void reject_unknown(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  require_object(j, where);
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) throw ConfigError(where + ": unknown key '" + item.key() + "'");
  }
}

double get_number(const Json& j, const std::string& key, double fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return j[key].get<double>();
}

std::size_t get_count(const Json& j, const std::string& key, std::size_t fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer() || j[key].get<long long>() < 0) {
    throw ConfigError(where + "." + key + ": expected a non-negative integer");
  }
  return j[key].get<std::size_t>();
}

std::size_t require_count(const Json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  return get_count(j, key, 0, where);
}

std::string get_string(const Json& j, const std::string& key, const std::string& fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string()) throw ConfigError(where + "." + key + ": expected a string");
  return j[key].get<std::string>();
}

bool get_bool(const Json& j, const std::string& key, bool fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean()) throw ConfigError(where + "." + key + ": expected true or false");
  return j[key].get<bool>();
}

std::vector<double> get_numbers(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& x : j) {
    if (!x.is_number()) throw ConfigError(where + ": expected numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::uint64_t get_seed(const Json& config) {
  if (!config.contains("seed")) return 0;
  if (!config["seed"].is_number_unsigned() && !(config["seed"].is_number_integer() && config["seed"] >= 0)) {
    throw ConfigError("seed: expected a non-negative integer");
  }
  return config["seed"].get<std::uint64_t>();
}

WeightedGraph graph_from_config(const Json& spec, const std::string& where) {
  require_object(spec, where);
  const std::string type = get_string(spec, "type", "", where);
  std::set<std::string> allowed{"type", "normalize", "scale"};
  WeightedGraph g;
  if (type == "grid1d") {
    allowed.insert("n");
    reject_unknown(spec, allowed, where);
    g = build_grid_1d(require_count(spec, "n", where));
  } else if (type == "grid2d") {
    allowed.insert({"nx", "ny"});
    reject_unknown(spec, allowed, where);
    g = build_grid_2d(require_count(spec, "nx", where), require_count(spec, "ny", where));
  } else if (type == "cycle") {
    allowed.insert("n");
    reject_unknown(spec, allowed, where);
    g = build_cycle(require_count(spec, "n", where));
  } else if (type == "knn") {
    allowed.insert({"points", "k"});
    reject_unknown(spec, allowed, where);
    const auto points = load_points(get_string(spec, "points", "", where));
    g = build_knn(points, require_count(spec, "k", where));
  } else if (type == "file") {
    allowed.insert("path");
    reject_unknown(spec, allowed, where);
    g = load_edge_list(get_string(spec, "path", "", where));
  } else {
    throw ConfigError(where + ".type: expected grid1d, grid2d, cycle, knn or file");
  }
  if (get_bool(spec, "normalize", false, where)) g = normalize_degree(g);
  if (spec.contains("scale")) g = scale_weights(g, get_number(spec, "scale", 1.0, where));
  return g;
}

// A configured series: exactly one of "alpha", "f" or "heat" at the top level.
struct SeriesSpec {
  std::optional<CoefficientSeries> alpha;
  std::optional<CoefficientSeries> f;

  CoefficientSeries kernel_alpha() const { return alpha ? *alpha : convolve_full(*f, *f); }
  CoefficientSeries features_f() const { return f ? *f : deconvolve(*alpha); }
};

std::optional<SeriesSpec> series_from_config(const Json& config) {
  const int given = static_cast<int>(config.contains("alpha")) + static_cast<int>(config.contains("f")) +
                    static_cast<int>(config.contains("heat"));
  if (given == 0) return std::nullopt;
  if (given > 1) throw ConfigError("series: give exactly one of 'alpha', 'f', 'heat'");
  SeriesSpec spec;
  if (config.contains("alpha")) spec.alpha = CoefficientSeries(get_numbers(config["alpha"], "alpha"));
  if (config.contains("f")) spec.f = CoefficientSeries(get_numbers(config["f"], "f"));
  if (config.contains("heat")) {
    const Json& heat = config["heat"];
    reject_unknown(heat, {"beta", "i_max"}, "heat");
    spec.alpha = heat_coefficients(get_number(heat, "beta", 1.0, "heat"), require_count(heat, "i_max", "heat"));
  }
  return spec;
}

SeriesSpec require_series(const Json& config) {
  auto spec = series_from_config(config);
  if (!spec) throw ConfigError("config: a series ('alpha', 'f' or 'heat') is required");
  return *spec;
}

struct Sampling {
  std::size_t n_walks = 100;
  double p_halt = 0.5;
  std::optional<std::size_t> i_max;

  CoefficientSeries apply(const CoefficientSeries& s) const { return i_max ? s.resized(*i_max) : s; }
};

Sampling sampling_from_config(const Json& config) {
  Sampling s;
  if (!config.contains("sampling")) return s;
  const Json& j = config["sampling"];
  reject_unknown(j, {"n_walks", "p_halt", "i_max"}, "sampling");
  s.n_walks = get_count(j, "n_walks", s.n_walks, "sampling");
  s.p_halt = get_number(j, "p_halt", s.p_halt, "sampling");
  if (j.contains("i_max")) s.i_max = get_count(j, "i_max", 0, "sampling");
  if (s.n_walks == 0) throw ConfigError("sampling.n_walks must be >= 1");
  if (!(s.p_halt > 0.0 && s.p_halt < 1.0)) throw ConfigError("sampling.p_halt must be in (0, 1)");
  return s;
}

// ---- output helpers -------------------------------------------------------

struct Context {
  fs::path out_dir;
  Json config;  // echoed verbatim
  std::ostream& out;
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw IoError("failed writing " + path.string());
}

void write_json(const fs::path& path, const Json& doc) { write_file(path, doc.dump(2) + "\n"); }

template <class Writer>
std::string render(Writer&& writer) {
  std::ostringstream s;
  writer(s);
  return s.str();
}

Json numbers(std::span<const double> xs) { return Json(std::vector<double>(xs.begin(), xs.end())); }

Json load_config(const std::string& path) {
  if (path.empty()) return Json::object();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  Json config;
  try {
    config = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  require_object(config, "config");
  return config;
}

// ---- commands -------------------------------------------------------------

struct GenGraphArgs {
  std::size_t grid1d = 0;
  std::vector<std::size_t> grid2d;
  std::size_t cycle = 0;
  std::string knn_points;
  std::size_t k = 0;
  bool normalize = false;
  std::optional<double> scale;
  std::string output;
};

int cmd_gen_graph(const GenGraphArgs& a, CLI::App& sub, const fs::path& out_dir, std::ostream& out) {
  const int builders = static_cast<int>(sub.count("--grid1d") > 0) + static_cast<int>(sub.count("--grid2d") > 0) +
                       static_cast<int>(sub.count("--cycle") > 0) + static_cast<int>(sub.count("--knn") > 0);
  if (builders != 1) throw ConfigError("gen-graph: give exactly one of --grid1d, --grid2d, --cycle, --knn");
  WeightedGraph g;
  if (sub.count("--grid1d")) {
    g = build_grid_1d(a.grid1d);
  } else if (sub.count("--grid2d")) {
    g = build_grid_2d(a.grid2d.at(0), a.grid2d.at(1));
  } else if (sub.count("--cycle")) {
    g = build_cycle(a.cycle);
  } else {
    if (!sub.count("--k")) throw ConfigError("gen-graph: --knn requires --k");
    g = build_knn(load_points(a.knn_points), a.k);
  }
  if (a.normalize) g = normalize_degree(g);
  if (a.scale) g = scale_weights(g, *a.scale);
  const fs::path target = a.output.empty() ? out_dir / "graph.txt" : fs::path(a.output);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  save_edge_list(target.string(), g);
  out << g.node_count() << ' ' << g.edge_count() << '\n';
  return kSuccess;
}

int cmd_oracle(Context& ctx) {
  const Json& config = ctx.config;
  reject_unknown(config, {"graph", "alpha", "f", "heat", "dense_limit"}, "oracle config");
  if (!config.contains("graph")) throw ConfigError("oracle: 'graph' is required");
  const WeightedGraph g = graph_from_config(config["graph"], "graph");
  const SeriesSpec series = require_series(config);
  const std::size_t limit = get_count(config, "dense_limit", kDefaultDenseLimit, "oracle config");
  const CoefficientSeries alpha = series.kernel_alpha();
  const CoefficientSeries f = series.features_f();

  const DenseMatrix kernel = dense_kernel(g, alpha, limit);
  const DenseMatrix features = dense_features(g, f, limit);
  const PositiveDefiniteReport pd = check_positive_definite(g, alpha, limit);

  save_csv((ctx.out_dir / "kernel.csv").string(), kernel);
  save_csv((ctx.out_dir / "features.csv").string(), features);
  Json report{{"config", config},
              {"alpha", numbers(alpha.coeffs())},
              {"f", numbers(f.coeffs())},
              {"positive_definite", pd.positive_definite},
              {"min_value", pd.min_value},
              {"eigenvalues", pd.eigenvalues}};
  write_json(ctx.out_dir / "pd_report.json", report);
  ctx.out << "positive_definite " << (pd.positive_definite ? "true" : "false") << " min_value "
          << format_double(pd.min_value) << '\n';
  return kSuccess;
}

int cmd_estimate(Context& ctx) {
  const Json& config = ctx.config;
  reject_unknown(config,
                 {"graph", "alpha", "f", "heat", "sampling", "seed", "variant", "ensembles", "dense_limit",
                  "dump_features", "dump_walks"},
                 "estimate config");
  if (!config.contains("graph")) throw ConfigError("estimate: 'graph' is required");
  const WeightedGraph g = graph_from_config(config["graph"], "graph");
  const SeriesSpec series = require_series(config);
  const Sampling sampling = sampling_from_config(config);
  const std::uint64_t seed = get_seed(config);
  const GrfVariant variant = parse_grf_variant(get_string(config, "variant", "symmetric", "estimate config"));
  const std::string ensembles = get_string(config, "ensembles", "independent", "estimate config");
  if (ensembles != "independent" && ensembles != "shared") {
    throw ConfigError("estimate.ensembles: expected independent or shared");
  }
  const std::size_t limit = get_count(config, "dense_limit", kDefaultDenseLimit, "estimate config");

  // asymmetric-f1 samples with f^(1) = alpha; the others with f = deconvolve(alpha).
  const bool asymmetric = variant == GrfVariant::asymmetric_f1;
  const CoefficientSeries f = sampling.apply(asymmetric ? series.kernel_alpha() : series.features_f());
  const CoefficientSeries target_alpha = asymmetric ? f : convolve_full(f, f);

  const GrfSet query_side = build_grf_set(g, f, sampling.p_halt, sampling.n_walks, seed, variant);
  DenseMatrix gram;
  if (asymmetric) {
    gram = densify(query_side);
  } else if (ensembles == "shared") {
    gram = gram_matrix(query_side, query_side);
  } else {
    const GrfSet key_side = build_grf_set(g, f, sampling.p_halt, sampling.n_walks, mix_seed(seed, 1), variant);
    gram = gram_matrix(query_side, key_side);
  }
  save_csv((ctx.out_dir / "gram.csv").string(), gram);

  double total_nnz = 0.0;
  for (const auto& feature : query_side.features) total_nnz += static_cast<double>(feature.nnz());
  Json summary{{"config", ctx.config},
               {"n_nodes", g.node_count()},
               {"mean_nnz", g.node_count() ? total_nnz / static_cast<double>(g.node_count()) : 0.0}};
  if (g.node_count() <= limit) {
    const DenseMatrix exact = dense_kernel(g, target_alpha, limit);
    double worst = 0.0;
    double sum = 0.0;
    for (std::size_t k = 0; k < exact.data().size(); ++k) {
      const double e = std::abs(exact.data()[k] - gram.data()[k]);
      worst = std::max(worst, e);
      sum += e;
    }
    summary["max_abs_error"] = worst;
    summary["mean_abs_error"] = exact.data().empty() ? 0.0 : sum / static_cast<double>(exact.data().size());
    ctx.out << "max_abs_error " << format_double(worst) << " mean_abs_error "
            << format_double(summary["mean_abs_error"].get<double>()) << '\n';
  } else {
    summary["max_abs_error"] = nullptr;
    summary["mean_abs_error"] = nullptr;
  }
  write_json(ctx.out_dir / "estimate.json", summary);
  if (get_bool(config, "dump_features", false, "estimate config")) {
    write_file(ctx.out_dir / "grfs.json", render([&](std::ostream& s) { write_grf_json(s, query_side); }));
  }
  if (get_bool(config, "dump_walks", false, "estimate config")) {
    std::ostringstream dump;
    for (NodeId i = 0; i < g.node_count(); ++i) {
      write_walk_dump(dump, sample_walks(g, i, sampling.p_halt, sampling.n_walks, seed, f.i_max()));
    }
    write_file(ctx.out_dir / "walks.txt", dump.str());
  }
  return kSuccess;
}

int cmd_attention(Context& ctx) {
  const Json& config = ctx.config;
  reject_unknown(config,
                 {"graph", "alpha", "f", "heat", "sampling", "seed", "attention", "inputs", "dense_limit"},
                 "attention config");
  Json attention = config.contains("attention") ? config["attention"] : Json::object();
  reject_unknown(attention, {"variant", "kind"}, "attention");
  const std::string variant = get_string(attention, "variant", "grf-masked", "attention");
  const FeatureMapKind kind = parse_feature_map(get_string(attention, "kind", "relu", "attention"));
  static const std::set<std::string> variants{"softmax", "linear", "dense-masked", "grf-masked", "asymmetric"};
  if (!variants.count(variant)) {
    throw ConfigError("attention.variant: expected softmax, linear, dense-masked, grf-masked or asymmetric");
  }
  if (!config.contains("inputs")) throw ConfigError("attention: 'inputs' with q, k, v paths is required");
  const Json& inputs = config["inputs"];
  reject_unknown(inputs, {"q", "k", "v"}, "inputs");
  for (const char* key : {"q", "k", "v"}) {
    if (!inputs.contains(key)) throw ConfigError(std::string("inputs: missing '") + key + "'");
  }
  const DenseMatrix q = load_csv(get_string(inputs, "q", "", "inputs"));
  const DenseMatrix k = load_csv(get_string(inputs, "k", "", "inputs"));
  const DenseMatrix v = load_csv(get_string(inputs, "v", "", "inputs"));
  if (q.rows() != k.rows() || q.rows() != v.rows() || q.cols() != k.cols()) {
    throw ShapeError("attention: Q, K, V shapes disagree");
  }
  const std::size_t limit = get_count(config, "dense_limit", kDefaultDenseLimit, "attention config");
  const Sampling sampling = sampling_from_config(config);
  const std::uint64_t seed = get_seed(config);

  Json report{{"config", config}, {"variant", variant}};
  AttentionOutput result;
  if (variant == "softmax") {
    const DenseMatrix values = softmax_attention(q, k, v);
    result = {values, std::vector<double>(q.rows(), 1.0), {}};
  } else if (variant == "linear") {
    result = linear_attention_unmasked(q, k, v, kind);
  } else {
    if (!config.contains("graph")) throw ConfigError("attention: masked variants need 'graph'");
    const WeightedGraph g = graph_from_config(config["graph"], "graph");
    if (g.node_count() != q.rows()) throw ShapeError("attention: graph node count != number of tokens");
    const SeriesSpec series = require_series(config);
    if (variant == "dense-masked") {
      const DenseMatrix phi_g = dense_features(g, sampling.apply(series.features_f()), limit);
      result = masked_linear_attention_dense(q, k, v, phi_g, kind);
      try {
        const DenseMatrix reference =
            explicit_masked_attention(q, k, v, matmul_transposed(phi_g, phi_g), ScoreKind::linear(kind));
        report["max_deviation"] = max_abs_diff(result.values, reference);
        ctx.out << "max_deviation " << format_double(report["max_deviation"].get<double>()) << '\n';
      } catch (const DegenerateNormalization& e) {
        report["max_deviation"] = nullptr;
        report["cross_check"] = e.what();
      }
    } else if (variant == "grf-masked") {
      const GrfSet grfs =
          build_grf_set(g, sampling.apply(series.features_f()), sampling.p_halt, sampling.n_walks, seed);
      result = masked_linear_attention_grf(q, k, v, grfs, kind);
    } else {
      result = masked_attention_asymmetric(q, k, v, g, sampling.apply(series.kernel_alpha()), sampling.p_halt,
                                           sampling.n_walks, seed, kind);
    }
  }
  save_csv((ctx.out_dir / "attention.csv").string(), result.values);
  report["degenerate_rows"] = result.degenerate_rows;
  report["row_normalizers"] = result.row_normalizers;
  write_json(ctx.out_dir / "attention.json", report);
  ctx.out << "degenerate_rows " << result.degenerate_rows.size() << '\n';
  return kSuccess;
}

int cmd_validate_bounds(Context& ctx) {
  const Json& config = ctx.config;
  reject_unknown(config, {"graph", "alpha", "f", "heat", "sampling", "seed", "concentration", "sparsity"},
                 "validate-bounds config");
  const WeightedGraph g = config.contains("graph") ? graph_from_config(config["graph"], "graph")
                                                   : normalize_degree(build_cycle(4));
  const CoefficientSeries alpha = series_from_config(config) ? series_from_config(config)->kernel_alpha()
                                                             : heat_coefficients(1.0, 4);
  const std::uint64_t seed = get_seed(config);

  ConcentrationConfig conc;
  conc.seed = seed;
  if (config.contains("sampling")) {
    const Json& s = config["sampling"];
    reject_unknown(s, {"n_walks", "p_halt"}, "sampling");
    conc.n_walks = get_count(s, "n_walks", conc.n_walks, "sampling");
    conc.p_halt = get_number(s, "p_halt", conc.p_halt, "sampling");
  }
  if (config.contains("concentration")) {
    const Json& c = config["concentration"];
    reject_unknown(c, {"node_pair", "t_grid", "trials", "c_scale"}, "concentration");
    if (c.contains("node_pair")) {
      const Json& pair = c["node_pair"];
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_unsigned() || !pair[1].is_number_unsigned()) {
        throw ConfigError("concentration.node_pair: expected [i, j]");
      }
      conc.node_i = pair[0].get<NodeId>();
      conc.node_j = pair[1].get<NodeId>();
    }
    if (c.contains("t_grid")) conc.t_grid = get_numbers(c["t_grid"], "concentration.t_grid");
    conc.trials = get_count(c, "trials", conc.trials, "concentration");
    conc.c_scale = get_number(c, "c_scale", conc.c_scale, "concentration");
  }
  if (conc.trials == 0) throw ConfigError("concentration.trials must be >= 1");
  if (conc.n_walks == 0) throw ConfigError("sampling.n_walks must be >= 1");
  if (!(conc.p_halt > 0.0 && conc.p_halt < 1.0)) throw ConfigError("sampling.p_halt must be in (0, 1)");
  for (double t : conc.t_grid) {
    if (!(t > 0.0)) throw ConfigError("concentration.t_grid: thresholds must be > 0");
  }
  if (!(conc.c_scale > 0.0)) throw ConfigError("concentration.c_scale must be > 0");

  SparsityConfig sparse;
  sparse.seed = mix_seed(seed, 7);
  std::size_t sparse_i_max = 64;
  WeightedGraph sparse_graph;
  bool custom_sparse_graph = false;
  if (config.contains("sparsity")) {
    const Json& s = config["sparsity"];
    reject_unknown(s, {"graph", "n_walks", "p_halt", "delta", "trials", "i_max"}, "sparsity");
    sparse.n_walks = get_count(s, "n_walks", sparse.n_walks, "sparsity");
    sparse.p_halt = get_number(s, "p_halt", sparse.p_halt, "sparsity");
    sparse.delta = get_number(s, "delta", sparse.delta, "sparsity");
    sparse.trials = get_count(s, "trials", sparse.trials, "sparsity");
    sparse_i_max = get_count(s, "i_max", sparse_i_max, "sparsity");
    if (s.contains("graph")) {
      sparse_graph = graph_from_config(s["graph"], "sparsity.graph");
      custom_sparse_graph = true;
    }
  }
  if (sparse.trials == 0) throw ConfigError("sparsity.trials must be >= 1");
  if (sparse.n_walks == 0) throw ConfigError("sparsity.n_walks must be >= 1");
  if (!(sparse.p_halt > 0.0 && sparse.p_halt < 1.0)) throw ConfigError("sparsity.p_halt must be in (0, 1)");
  if (!(sparse.delta > 0.0 && sparse.delta < 1.0)) throw ConfigError("sparsity.delta must be in (0, 1)");
  if (!custom_sparse_graph) sparse_graph = normalize_degree(build_grid_1d(1024));

  const BoundReport bounds = empirical_concentration(g, alpha, conc);
  // Unit coefficients make every visited node a nonzero coordinate.
  const CoefficientSeries support_f(std::vector<double>(sparse_i_max + 1, 1.0));
  const SparsityReport sparsity = empirical_sparsity(sparse_graph, support_f, sparse);

  write_file(ctx.out_dir / "bounds.csv", render([&](std::ostream& s) { write_bound_csv(s, bounds); }));
  write_json(ctx.out_dir / "bounds.json", Json{{"config", config}, {"concentration", to_json(bounds)}});
  write_json(ctx.out_dir / "sparsity.json", Json{{"config", config}, {"sparsity", to_json(sparsity)}});

  ctx.out << "concentration " << (bounds.holds() ? "ok" : "VIOLATED") << " sparsity "
          << (sparsity.holds() ? "ok" : "VIOLATED") << '\n';
  if (!bounds.holds() || !sparsity.holds()) {
    throw ValidationFailure("validate-bounds: empirical frequencies exceed the theoretical bounds");
  }
  return kSuccess;
}

int cmd_flops(Context& ctx) {
  const Json& config = ctx.config;
  reject_unknown(config,
                 {"graph_family", "sizes", "n_walks", "p_halt", "d", "m", "alpha", "f", "heat", "seeds", "kind"},
                 "flops config");
  FlopConfig fc;
  fc.graph_family = get_string(config, "graph_family", fc.graph_family, "flops config");
  if (config.contains("sizes")) {
    const Json& sizes = config["sizes"];
    if (!sizes.is_array() || sizes.empty()) throw ConfigError("flops.sizes: expected a non-empty array");
    fc.sizes.clear();
    for (const auto& s : sizes) {
      if (!s.is_number_unsigned()) throw ConfigError("flops.sizes: expected positive integers");
      fc.sizes.push_back(s.get<std::size_t>());
    }
  }
  fc.n_walks = get_count(config, "n_walks", fc.n_walks, "flops config");
  fc.p_halt = get_number(config, "p_halt", fc.p_halt, "flops config");
  fc.d = get_count(config, "d", fc.d, "flops config");
  fc.m = get_count(config, "m", fc.m, "flops config");
  if (auto series = series_from_config(config)) fc.f = series->features_f();
  if (config.contains("seeds")) {
    const Json& seeds = config["seeds"];
    fc.seeds.clear();
    if (seeds.is_number_unsigned()) {
      for (std::uint64_t s = 0; s < seeds.get<std::uint64_t>(); ++s) fc.seeds.push_back(s);
    } else if (seeds.is_array()) {
      for (const auto& s : seeds) {
        if (!s.is_number_unsigned()) throw ConfigError("flops.seeds: expected non-negative integers");
        fc.seeds.push_back(s.get<std::uint64_t>());
      }
    } else {
      throw ConfigError("flops.seeds: expected a count or a list of seeds");
    }
  }
  fc.kind = parse_feature_map(get_string(config, "kind", "relu", "flops config"));
  if (fc.n_walks == 0) throw ConfigError("flops.n_walks must be >= 1");
  if (!(fc.p_halt > 0.0 && fc.p_halt < 1.0)) throw ConfigError("flops.p_halt must be in (0, 1)");

  const FlopReport report = flop_experiment(fc);
  write_file(ctx.out_dir / "flops.csv", render([&](std::ostream& s) { write_flop_csv(s, report); }));
  Json doc = to_json(report);
  doc["config"] = config;
  write_json(ctx.out_dir / "flops.json", doc);
  for (const auto& row : report.rows) {
    ctx.out << row.variant << ' ' << row.n_nodes << ' ' << format_double(row.flops_mean) << '\n';
  }
  return kSuccess;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ValidationFailure*>(&e)) return kValidation;
  if (dynamic_cast<const SeriesError*>(&e)) return kSeries;
  if (dynamic_cast<const ShapeError*>(&e) || dynamic_cast<const IoError*>(&e) ||
      dynamic_cast<const IndexError*>(&e) || dynamic_cast<const fs::filesystem_error*>(&e)) {
    return kShapeOrIo;
  }
  if (dynamic_cast<const InvalidArgument*>(&e) || dynamic_cast<const AmbiguityError*>(&e) ||
      dynamic_cast<const nlohmann::json::exception*>(&e)) {
    return kUsage;
  }
  return kFailure;
}

std::size_t resolve_threads(std::optional<std::size_t> flag) {
  if (flag) return std::max<std::size_t>(1, *flag);
  if (const char* env = std::getenv("GRFMASK_THREADS")) {
    try {
      const long value = std::stol(env);
      if (value > 0) return static_cast<std::size_t>(value);
    } catch (const std::exception&) {
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph-masked linear attention toolkit", "grfmask"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::size_t> threads;
  app.add_option("--config", config_path, "JSON experiment config");
  app.add_option("--out-dir", out_dir, "Directory for output files");
  app.add_option("--threads", threads, "Worker threads (default: GRFMASK_THREADS or all cores)")
      ->check(CLI::PositiveNumber);

  GenGraphArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-graph", "Write an edge-list graph");
  gen_cmd->add_option("--grid1d", gen.grid1d, "Path graph with N nodes");
  gen_cmd->add_option("--grid2d", gen.grid2d, "NX NY grid")->expected(2);
  gen_cmd->add_option("--cycle", gen.cycle, "Cycle with N nodes");
  gen_cmd->add_option("--knn", gen.knn_points, "Points file (x y z per line)");
  gen_cmd->add_option("--k", gen.k, "Neighbors per point for --knn");
  gen_cmd->add_flag("--normalize", gen.normalize, "Degree-normalize weights");
  gen_cmd->add_option("--scale", gen.scale, "Multiply all weights");
  gen_cmd->add_option("-o,--output", gen.output, "Output path (default <out-dir>/graph.txt)");
  auto* oracle_cmd = app.add_subcommand("oracle", "Dense kernel, features and PD report");
  auto* estimate_cmd = app.add_subcommand("estimate", "GRF Gram estimate vs the dense kernel");
  auto* attention_cmd = app.add_subcommand("attention", "Run an attention variant on CSV inputs");
  auto* bounds_cmd = app.add_subcommand("validate-bounds", "Monte Carlo check of concentration and sparsity bounds");
  auto* flops_cmd = app.add_subcommand("flops", "FLOP scaling experiment");
  for (auto* sub : {gen_cmd, oracle_cmd, estimate_cmd, attention_cmd, bounds_cmd, flops_cmd}) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }

  try {
    set_thread_count(resolve_threads(threads));
    const fs::path dir(out_dir);
    fs::create_directories(dir);
    if (*gen_cmd) return cmd_gen_graph(gen, *gen_cmd, dir, out);
    Context ctx{dir, load_config(config_path), out};
    if (*oracle_cmd) return cmd_oracle(ctx);
    if (*estimate_cmd) return cmd_estimate(ctx);
    if (*attention_cmd) return cmd_attention(ctx);
    if (*bounds_cmd) return cmd_validate_bounds(ctx);
    if (*flops_cmd) return cmd_flops(ctx);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kUsage;
}

}  // namespace grfmask::cli
