#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "bubbleflow/modulation/fit.hpp"

namespace bubbleflow {

/// Graded grid that resolves every scale in [lambda_min, lambda_max] for quadrature of
/// bubble sums: inner cells 1e-3 lambda_min, outer edge 1e5 lambda_max, growth 1 + 1/n_per_e.
inline GridPtr quadrature_grid(int dim, double lambda_min, double lambda_max, double growth = 1.0005) {
  require_domain(lambda_min > 0 && lambda_max >= lambda_min, "quadrature grid: bad scale range");
  const double h0 = 1e-3 * lambda_min, r_max = 1e5 * lambda_max;
  const double q1 = growth - 1.0;
  const auto n = static_cast<std::size_t>(std::ceil(std::log1p(r_max * q1 / h0) / std::log1p(q1)));
  return make_geometric_grid(dim, std::max<std::size_t>(n, 16), r_max, growth);
}

/// (D(D-2))^{D/2} / D
inline double expansion_coefficient(int dim) { return std::pow(dim * (dim - 2.0), 0.5 * dim) / dim; }

/// ((D-2)/(2D)) (D(D-2))^{D/2}
inline double interaction_coefficient(int dim) {
  return (dim - 2.0) / (2.0 * dim) * std::pow(dim * (dim - 2.0), 0.5 * dim);
}

struct ExpansionCheck {
  double lhs = 0.0;       ///< E(W) - M E(W)
  double leading = 0.0;   ///< coeff * sum iota_j iota_{j+1} ratio_j
  double ratio_sum = 0.0; ///< sum ratio_j
  /// |lhs + leading| / ratio_sum, the effective theta of the expansion.
  double theta() const { return ratio_sum > 0.0 ? std::abs(lhs + leading) / ratio_sum : 0.0; }
};

/// E(W(iota, lambda)) - M E(W) against -coeff sum iota_j iota_{j+1} (lambda_j/lambda_{j+1})^{(D-2)/2}.
/// M E(W) is taken as sum_j E_h(W_lambda_j) on the same grid so the scheme's quadrature error cancels.
inline ExpansionCheck energy_expansion_check(const BubbleConfig& c, const GridPtr& grid) {
  c.validate();
  const int dim = grid->dim();
  ExpansionCheck out;
  out.lhs = energy(multi_bubble(c, grid));
  for (double lam : c.scales) out.lhs -= energy(bubble_field(grid, lam));
  const double a = scaling_weight(dim);
  for (std::size_t j = 0; j + 1 < c.size(); ++j) {
    const double r = std::pow(c.scales[j] / c.scales[j + 1], a);
    out.ratio_sum += r;
    out.leading += c.signs[j] * c.signs[j + 1] * r;
  }
  out.leading *= expansion_coefficient(dim);
  return out;
}

inline ExpansionCheck energy_expansion_check(int dim, const BubbleConfig& c) {
  c.validate();
  if (c.empty()) return {};
  return energy_expansion_check(c, quadrature_grid(dim, c.scales.front(), c.scales.back()));
}

struct InteractionCheck {
  double pairing = 0.0;
  double leading = 0.0;
  double ratio_terms = 0.0; ///< (lambda_{j-1}/lambda_j)^a + (lambda_j/lambda_{j+1})^a
  double ratio() const { return leading != 0.0 ? pairing / leading : 0.0; }
  double theta() const { return ratio_terms > 0.0 ? std::abs(pairing - leading) / ratio_terms : 0.0; }
};

/// <(Lambda W)_lambda_j | f_i> with f_i = f(W) - sum_k iota_k f(W_lambda_k), j 1-based,
/// against iota_{j-1} c (lambda_{j-1}/lambda_j)^a - iota_{j+1} c (lambda_j/lambda_{j+1})^a
/// (lambda_0 = 0, lambda_{M+1} = infinity).
inline InteractionCheck interaction_pairing(const BubbleConfig& c, std::size_t j, const GridPtr& grid) {
  c.validate();
  require_domain(j >= 1 && j <= c.size(), "interaction index out of range");
  const int dim = grid->dim();
  const auto w = multi_bubble(c, grid);
  const auto r = grid->nodes();
  const auto vol = grid->volumes();
  const double lam = c.scales[j - 1];
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    double fi = nonlinearity(dim, w[i]);
    for (std::size_t k = 0; k < c.size(); ++k) fi -= c.signs[k] * nonlinearity(dim, eval_bubble(dim, c.scales[k], r[i]));
    s += vol[i] * eval_lambda_bubble_scaled(dim, lam, r[i]) * fi;
  }
  InteractionCheck out;
  out.pairing = s;
  const double a = scaling_weight(dim), coef = interaction_coefficient(dim);
  if (j >= 2) {
    const double t = std::pow(c.scales[j - 2] / lam, a);
    out.leading += c.signs[j - 2] * coef * t;
    out.ratio_terms += t;
  }
  if (j < c.size()) {
    const double t = std::pow(lam / c.scales[j], a);
    out.leading -= c.signs[j] * coef * t;
    out.ratio_terms += t;
  }
  return out;
}

inline InteractionCheck interaction_pairing(int dim, const BubbleConfig& c, std::size_t j) {
  c.validate();
  require_domain(!c.empty(), "interaction needs at least one bubble");
  return interaction_pairing(c, j, quadrature_grid(dim, c.scales.front(), c.scales.back()));
}

/// Finite-difference modulation speeds between two fitted states against the bounds
/// |lambda_j'| <= C0 d / lambda_j and (D >= 6) |a_j^-'| <= C0 d^2 / lambda_j^2.
struct LambdaDotReport {
  std::vector<double> lambda_dot;
  std::vector<double> a_minus_dot;
  double c_lambda = 0.0;  ///< max_j |lambda_j'| lambda_j / d
  double c_a = 0.0;       ///< max_j |a_j^-'| lambda_j^2 / d^2
  bool a_bound_applies = false;

  bool holds(double c0) const { return c_lambda <= c0 && (!a_bound_applies || c_a <= c0); }
};

inline LambdaDotReport lambda_dot_bound_check(const ModulationState& s0, double t0, const ModulationState& s1, double t1,
                                              double d) {
  require_domain(t1 > t0, "lambda-dot check needs t1 > t0");
  require_domain(s0.config.size() == s1.config.size(), "lambda-dot check: bubble counts differ");
  LambdaDotReport rep;
  rep.a_bound_applies = s0.g.dim() >= 6;
  const double dt = t1 - t0;
  for (std::size_t j = 0; j < s0.config.size(); ++j) {
    const double lam = 0.5 * (s0.config.scales[j] + s1.config.scales[j]);
    const double ld = (s1.config.scales[j] - s0.config.scales[j]) / dt;
    const double ad = (s1.a_minus[j] - s0.a_minus[j]) / dt;
    rep.lambda_dot.push_back(ld);
    rep.a_minus_dot.push_back(ad);
    if (d > 0.0) {
      rep.c_lambda = std::max(rep.c_lambda, std::abs(ld) * lam / d);
      rep.c_a = std::max(rep.c_a, std::abs(ad) * lam * lam / (d * d));
    } else if (ld != 0.0 || ad != 0.0) {
      rep.c_lambda = infinity;
    }
  }
  return rep;
}

/// ||g||_E + sum_{j not in S} ratio_j^{(D-2)/4} against max_{j in S} ratio_j^{(D-2)/4} + max|a^-|,
/// S = {j : iota_j = iota_{j+1}}.
struct SignSetBound {
  double lhs = 0.0;
  double rhs = 0.0;
  double effective_c() const { return rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? infinity : 0.0); }
};

inline SignSetBound sign_set_bound(const ModulationState& st) {
  SignSetBound b;
  const auto& c = st.config;
  const double q = 0.25 * (st.g.dim() - 2.0);
  b.lhs = enorm(st.g);
  double same = 0.0;
  for (std::size_t j = 0; j + 1 < c.size(); ++j) {
    const double t = std::pow(c.scales[j] / c.scales[j + 1], q);
    if (c.signs[j] == c.signs[j + 1])
      same = std::max(same, t);
    else
      b.lhs += t;
  }
  double amax = 0.0;
  for (double a : st.a_minus) amax = std::max(amax, std::abs(a));
  b.rhs = same + amax;
  return b;
}

} // namespace bubbleflow
