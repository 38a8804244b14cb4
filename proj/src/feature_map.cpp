#include "grfmask/feature_map.hpp"

#include <cmath>

#include "grfmask/errors.hpp"

namespace grfmask {

FeatureMapKind parse_feature_map(const std::string& name) {
  if (name == "relu") return FeatureMapKind::relu;
  if (name == "elu-plus-one") return FeatureMapKind::elu_plus_one;
  throw InvalidArgument("unknown feature map '" + name + "' (expected relu or elu-plus-one)");
}

std::string to_string(FeatureMapKind kind) {
  return kind == FeatureMapKind::relu ? "relu" : "elu-plus-one";
}

std::vector<double> feature_map(std::span<const double> x, FeatureMapKind kind) {
  std::vector<double> out(x.size());
  for (std::size_t a = 0; a < x.size(); ++a) {
    const double v = x[a];
    if (kind == FeatureMapKind::relu) {
      out[a] = v > 0.0 ? v : 0.0;
    } else {
      // elu(v) + 1 = e^v for v < 0; exp keeps it strictly positive where expm1 + 1 would round to 0.
      out[a] = v > 0.0 ? v + 1.0 : std::exp(v);
    }
  }
  return out;
}

DenseMatrix feature_map_rows(const DenseMatrix& x, FeatureMapKind kind) {
  DenseMatrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto mapped = feature_map(x.row(i), kind);
    std::copy(mapped.begin(), mapped.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace grfmask
