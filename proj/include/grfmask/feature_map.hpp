#pragma once

#include <span>
#include <string>
#include <vector>

#include "grfmask/dense.hpp"

namespace grfmask {

// Deterministic linear-attention nonlinearity phi: R^d -> R^d.
enum class FeatureMapKind { relu, elu_plus_one };

FeatureMapKind parse_feature_map(const std::string& name);
std::string to_string(FeatureMapKind kind);

std::vector<double> feature_map(std::span<const double> x, FeatureMapKind kind);
// Row-wise feature map of a matrix.
DenseMatrix feature_map_rows(const DenseMatrix& x, FeatureMapKind kind);

// How attention scores A_ij are formed from q_i and k_j.
struct ScoreKind {
  enum class Type { softmax, linear } type = Type::linear;
  FeatureMapKind map = FeatureMapKind::relu;

  static ScoreKind softmax() { return {Type::softmax, FeatureMapKind::relu}; }
  static ScoreKind linear(FeatureMapKind map) { return {Type::linear, map}; }
};

}  // namespace grfmask
