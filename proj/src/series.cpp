#include "grfmask/series.hpp"

#include <algorithm>
#include <cmath>

#include "grfmask/errors.hpp"

namespace grfmask {

CoefficientSeries::CoefficientSeries(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) throw InvalidArgument("series: at least one coefficient required");
  for (double c : coeffs_) {
    if (!std::isfinite(c)) throw InvalidArgument("series: coefficients must be finite");
  }
}

CoefficientSeries CoefficientSeries::resized(std::size_t i_max) const {
  std::vector<double> out(coeffs_);
  out.resize(i_max + 1, 0.0);
  return CoefficientSeries(std::move(out));
}

CoefficientSeries deconvolve(const CoefficientSeries& alpha) {
  if (!(alpha[0] > 0.0)) throw SeriesError("deconvolve: alpha_0 must be > 0 for a real deconvolution");
  const std::size_t len = alpha.size();
  std::vector<double> f(len, 0.0);
  f[0] = std::sqrt(alpha[0]);
  for (std::size_t k = 1; k < len; ++k) {
    double cross = 0.0;
    for (std::size_t p = 1; p < k; ++p) cross += f[p] * f[k - p];
    f[k] = (alpha[k] - cross) / (2.0 * f[0]);
  }
  return CoefficientSeries(std::move(f));
}

CoefficientSeries convolve_full(const CoefficientSeries& a, const CoefficientSeries& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t p = 0; p < a.size(); ++p) {
    for (std::size_t q = 0; q < b.size(); ++q) out[p + q] += a[p] * b[q];
  }
  return CoefficientSeries(std::move(out));
}

CoefficientSeries convolve(const CoefficientSeries& a, const CoefficientSeries& b) {
  return convolve_full(a, b).resized(std::max(a.i_max(), b.i_max()));
}

CoefficientSeries heat_coefficients(double beta, std::size_t i_max) {
  std::vector<double> alpha(i_max + 1);
  double term = 1.0;
  for (std::size_t k = 0; k <= i_max; ++k) {
    alpha[k] = term;
    term *= beta / static_cast<double>(k + 1);
  }
  return CoefficientSeries(std::move(alpha));
}

double c_constant(const CoefficientSeries& f, const WeightedGraph& g, double p_halt) {
  if (!(p_halt > 0.0 && p_halt < 1.0)) throw InvalidArgument("c_constant: p_halt must be in (0, 1)");
  double load = 0.0;
  for (NodeId i = 0; i < g.node_count(); ++i) {
    const double d = static_cast<double>(g.degree(i));
    for (const Neighbor& nb : g.neighbors(i)) load = std::max(load, std::abs(nb.weight) * d);
  }
  const double base = load / (1.0 - p_halt);
  double c = 0.0;
  double power = 1.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    c += std::abs(f[k]) * power;
    power *= base;
  }
  return c;
}

}  // namespace grfmask
