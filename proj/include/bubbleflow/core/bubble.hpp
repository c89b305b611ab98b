#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "bubbleflow/core/error.hpp"
#include "bubbleflow/core/field.hpp"

namespace bubbleflow {

/// Critical exponent p = (D+2)/(D-2).
inline double critical_power(int dim) { return (dim + 2.0) / (dim - 2.0); }
/// Sobolev exponent 2* = 2D/(D-2).
inline double sobolev_exponent(int dim) { return 2.0 * dim / (dim - 2.0); }
/// Energy-critical scaling weight (D-2)/2.
inline double scaling_weight(int dim) { return 0.5 * (dim - 2.0); }

/// f(z) = |z|^{4/(D-2)} z
inline double nonlinearity(int dim, double z) { return std::pow(std::abs(z), 4.0 / (dim - 2.0)) * z; }
/// f'(z) = (D+2)/(D-2) |z|^{4/(D-2)}
inline double nonlinearity_derivative(int dim, double z) {
  return critical_power(dim) * std::pow(std::abs(z), 4.0 / (dim - 2.0));
}
/// F(z) = |z|^{2*}/2*
inline double potential(int dim, double z) {
  const double s = sobolev_exponent(dim);
  return std::pow(std::abs(z), s) / s;
}

/// Aubin-Talenti profile at scale lambda: lambda^{-(D-2)/2} (1 + (r/lambda)^2/(D(D-2)))^{-(D-2)/2}.
inline double eval_bubble(int dim, double lambda, double r) {
  require_domain(dim >= 3, "bubble needs D >= 3");
  require_domain(lambda > 0, "bubble scale must be positive");
  const double s = r / lambda;
  const double a = scaling_weight(dim);
  return std::pow(lambda, -a) * std::pow(1.0 + s * s / (dim * (dim - 2.0)), -a);
}

/// d/dr of eval_bubble.
inline double eval_bubble_derivative(int dim, double lambda, double r) {
  require_domain(dim >= 3 && lambda > 0, "bubble derivative: bad arguments");
  const double k = dim * (dim - 2.0);
  const double s = r / lambda;
  return -std::pow(lambda, -scaling_weight(dim) - 1.0) * (dim - 2.0) * s / k * std::pow(1.0 + s * s / k, -0.5 * dim);
}

/// (Lambda W)(r) with Lambda = r d_r + (D-2)/2, i.e.
/// ((D-2)/2) (1 - r^2/(D(D-2))) (1 + r^2/(D(D-2)))^{-D/2}.
/// Positive for r < sqrt(D(D-2)), negative beyond.
inline double eval_lambda_bubble(int dim, double r) {
  require_domain(dim >= 3, "Lambda W needs D >= 3");
  const double k = dim * (dim - 2.0);
  const double s2 = r * r / k;
  return scaling_weight(dim) * (1.0 - s2) * std::pow(1.0 + s2, -0.5 * dim);
}

/// d/dr of eval_lambda_bubble.
inline double eval_lambda_bubble_derivative(int dim, double r) {
  const double k = dim * (dim - 2.0);
  const double s2 = r * r / k;
  const double a = scaling_weight(dim);
  // d/dr [(1-s2)(1+s2)^{-D/2}] with ds2/dr = 2r/k
  const double ds2 = 2.0 * r / k;
  return a * ds2 * (-std::pow(1.0 + s2, -0.5 * dim) - 0.5 * dim * (1.0 - s2) * std::pow(1.0 + s2, -0.5 * dim - 1.0));
}

/// Root of Lambda W.
inline double lambda_bubble_root(int dim) { return std::sqrt(dim * (dim - 2.0)); }

/// H-invariant rescaling of Lambda W: lambda^{-(D-2)/2} (Lambda W)(r/lambda).
inline double eval_lambda_bubble_scaled(int dim, double lambda, double r) {
  return std::pow(lambda, -scaling_weight(dim)) * eval_lambda_bubble(dim, r / lambda);
}

/// Signs and increasing scales of a multi-bubble sum_j iota_j W_{lambda_j}.
struct BubbleConfig {
  std::vector<int> signs;
  std::vector<double> scales;

  std::size_t size() const { return scales.size(); }
  bool empty() const { return scales.empty(); }

  void validate() const {
    require_domain(signs.size() == scales.size(), "config: signs and scales differ in length");
    for (int s : signs) require_domain(s == 1 || s == -1, "config: signs must be +1 or -1");
    for (double l : scales) require_domain(l > 0 && std::isfinite(l), "config: scales must be positive");
    for (std::size_t j = 1; j < scales.size(); ++j)
      require_domain(scales[j - 1] < scales[j], "config: scales must be strictly increasing");
  }

  /// Sorts by scale carrying the signs along; used after unconstrained searches.
  BubbleConfig sorted() const {
    std::vector<std::size_t> idx(size());
    for (std::size_t j = 0; j < idx.size(); ++j) idx[j] = j;
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return scales[a] < scales[b]; });
    BubbleConfig out;
    for (auto j : idx) {
      out.signs.push_back(signs[j]);
      out.scales.push_back(scales[j]);
    }
    return out;
  }

  bool operator==(const BubbleConfig&) const = default;
};

/// Sum over j of (lambda_j / lambda_{j+1})^{(D-2)/2} for j = 1..M-1.
inline double interior_ratio_sum(int dim, const BubbleConfig& c) {
  double s = 0.0;
  for (std::size_t j = 1; j < c.size(); ++j) s += std::pow(c.scales[j - 1] / c.scales[j], scaling_weight(dim));
  return s;
}

inline double eval_multi_bubble(int dim, const BubbleConfig& c, double r) {
  double s = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) s += c.signs[j] * eval_bubble(dim, c.scales[j], r);
  return s;
}

inline RadialField multi_bubble(const BubbleConfig& c, const GridPtr& grid) {
  c.validate();
  if (c.empty()) return RadialField::zero(grid);
  const int dim = grid->dim();
  const FieldTag tag = c.size() == 1 ? FieldTag::exact_bubble : FieldTag::exact_multibubble;
  return RadialField::sample(grid, [&](double r) { return eval_multi_bubble(dim, c, r); }, tag);
}

inline RadialField bubble_field(const GridPtr& grid, double lambda = 1.0, int sign = 1) {
  return multi_bubble(BubbleConfig{{sign}, {lambda}}, grid);
}

/// H-invariant rescaling v_lambda(r) = lambda^{-(D-2)/2} v(r/lambda), sampled on `target`.
inline RadialField rescale(const RadialField& v, double lambda, GridPtr target) {
  const double amp = std::pow(lambda, -scaling_weight(v.dim()));
  return RadialField::sample(std::move(target), [&](double r) { return amp * v.at(r / lambda); });
}

/// Rescaling onto the matched mapped grid: values are copied exactly.
inline RadialField rescale_mapped(const RadialField& v, double lambda) {
  auto g = scaled_grid(v.grid(), lambda);
  std::vector<double> vals(v.values().begin(), v.values().end());
  const double amp = std::pow(lambda, -scaling_weight(v.dim()));
  for (double& x : vals) x *= amp;
  return RadialField(std::move(g), std::move(vals));
}

} // namespace bubbleflow
