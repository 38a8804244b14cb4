#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "grfmask/graph.hpp"

namespace grfmask {

// Finite power-series coefficients; entry k multiplies W^k. Used both for the
// kernel coefficients alpha and for their deconvolution f. Length i_max + 1 >= 1.
class CoefficientSeries {
 public:
  CoefficientSeries() : coeffs_{0.0} {}
  explicit CoefficientSeries(std::vector<double> coeffs);
  CoefficientSeries(std::initializer_list<double> coeffs)
      : CoefficientSeries(std::vector<double>(coeffs)) {}

  std::size_t i_max() const { return coeffs_.size() - 1; }
  std::size_t size() const { return coeffs_.size(); }
  double operator[](std::size_t k) const { return coeffs_[k]; }
  std::span<const double> coeffs() const { return coeffs_; }
  // Zero-padded or truncated copy with the given i_max.
  CoefficientSeries resized(std::size_t i_max) const;

  friend bool operator==(const CoefficientSeries&, const CoefficientSeries&) = default;

 private:
  std::vector<double> coeffs_;
};

// f with sum_{p<=k} f_p f_{k-p} = alpha_k for k <= i_max, f_0 = +sqrt(alpha_0).
CoefficientSeries deconvolve(const CoefficientSeries& alpha);
// Discrete convolution truncated to the longer input's i_max.
CoefficientSeries convolve(const CoefficientSeries& a, const CoefficientSeries& b);
// Untruncated convolution, i_max = a.i_max() + b.i_max(). This is the series of
// Phi_a Phi_b^T when Phi_x = sum_k x_k W^k.
CoefficientSeries convolve_full(const CoefficientSeries& a, const CoefficientSeries& b);

// alpha_k = beta^k / k!
CoefficientSeries heat_coefficients(double beta, std::size_t i_max);

// c = sum_k |f_k| B^k with B = max_{(i,j) in E} |w_ij| d_i / (1 - p_halt); B = 0 without edges.
double c_constant(const CoefficientSeries& f, const WeightedGraph& g, double p_halt);

}  // namespace grfmask
