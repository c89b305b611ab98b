#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "bubbleflow/modulation/proximity.hpp"
#include "bubbleflow/spectral/zprofile.hpp"

namespace bubbleflow {

struct ModulationState {
  BubbleConfig config;
  RadialField g;
  std::vector<double> a_minus;
  std::vector<double> ortho_residuals; ///< <Z_lambda_j | g>
  int iterations = 0;
  bool converged = false;
  bool singular = false;
  double condition = 0.0;  ///< 2-norm condition number of the last Jacobian
  double tolerance = 0.0;  ///< bound the residuals were required to meet

  double objective() const { return enorm_sq(g) + ratio_penalty(g.dim(), config.scales); }
  double max_residual() const {
    double m = 0.0;
    for (double r : ortho_residuals) m = std::max(m, std::abs(r));
    return m;
  }
};

struct FitOptions {
  int max_iterations = 50;
  double rel_tol = 1e-10;    ///< residuals relative to ||Z|| ||g||_{L^2(support)}
  double abs_floor = 1e-13;  ///< ... or to ||Z|| ||v||_{L^2(support)} when g is tiny
  double max_condition = 1e12;
};

/// a_j^- = (kappa / lambda_j) <Y_lambda_j | g>.
inline std::vector<double> unstable_components(const RadialField& g, const BubbleConfig& c, const Eigenpair& eig) {
  std::vector<double> a;
  for (double lam : c.scales) a.push_back(eig.kappa / lam * pair_y(eig, g, lam));
  return a;
}

namespace detail {

inline double l2_on(const RadialField& f, double lo, double hi) {
  const auto r = f.grid().nodes();
  const auto v = f.grid().volumes();
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i)
    if (r[i] >= lo && r[i] <= hi) s += v[i] * f[i] * f[i];
  return std::sqrt(s);
}

} // namespace detail

/// Newton iteration in x = log(lambda) on F_j = lambda_j^{-1} <Z_lambda_j | v - W(iota, lambda)>
/// with signs fixed by `initial`. The Jacobian is analytic:
///   dF_j/dx_k = lambda_j^{-1} iota_k <Z_lambda_j | (Lambda W)_lambda_k>
///             - delta_jk (F_j + lambda_j^{-1} <(underline-Lambda Z)_lambda_j | g>).
inline ModulationState fit_modulation(const RadialField& v, const BubbleConfig& initial, const Eigenpair& eig,
                                      const ZProfile& z, const FitOptions& opt = {}) {
  initial.validate();
  const std::size_t m = initial.size();
  const int dim = v.dim();
  const auto grid = v.grid_ptr();
  ModulationState st;
  st.config = initial;
  // ||Z_lambda||_{L^2} does not depend on lambda
  const double znorm = std::sqrt(z.norm_sq(*grid, initial.empty() ? 1.0 : initial.scales[0]));

  auto residual = [&](const std::vector<double>& scales, RadialField& g) {
    g = v - multi_bubble(BubbleConfig{initial.signs, scales}.sorted(), grid);
    Eigen::VectorXd F(static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j) F[static_cast<Eigen::Index>(j)] = z.pair(g, scales[j]) / scales[j];
    return F;
  };
  auto tolerance = [&](const std::vector<double>& scales, const RadialField& g) {
    double t = 0.0;
    for (double lam : scales) {
      const double lo = z.support_lo() * lam, hi = z.support_hi() * lam;
      t = std::max(t, std::max(opt.rel_tol * detail::l2_on(g, lo, hi), opt.abs_floor * detail::l2_on(v, lo, hi)));
    }
    return t * znorm;
  };

  std::vector<double> scales = initial.scales;
  RadialField g;
  if (m == 0) {
    st.g = v;
    st.converged = true;
    return st;
  }
  Eigen::VectorXd F = residual(scales, g);
  auto scaled_norm = [&](const Eigen::VectorXd& f, const std::vector<double>& s) {
    double n = 0.0;
    for (std::size_t j = 0; j < m; ++j) n = std::max(n, std::abs(f[static_cast<Eigen::Index>(j)] * s[j]));
    return n;
  };
  double fnorm = scaled_norm(F, scales);
  for (st.iterations = 0; st.iterations < opt.max_iterations; ++st.iterations) {
    if (fnorm <= 1e-3 * tolerance(scales, g)) break;
    Eigen::MatrixXd J(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    std::vector<RadialField> lw;
    for (std::size_t k = 0; k < m; ++k)
      lw.push_back(RadialField::sample(grid, [&](double r) { return eval_lambda_bubble_scaled(dim, scales[k], r); }));
    for (std::size_t j = 0; j < m; ++j) {
      const auto J_ = static_cast<Eigen::Index>(j);
      for (std::size_t k = 0; k < m; ++k)
        J(J_, static_cast<Eigen::Index>(k)) = initial.signs[k] * z.pair(lw[k], scales[j]) / scales[j];
      J(J_, J_) -= F[J_] + z.pair_generator(g, scales[j]) / scales[j];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
    const auto& sv = svd.singularValues();
    st.condition = sv[0] / std::max(sv[sv.size() - 1], 1e-300);
    if (!(st.condition < opt.max_condition)) {
      st.singular = true;
      break;
    }
    const Eigen::VectorXd dx = -J.colPivHouseholderQr().solve(F);
    double step = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 30; ++ls, step *= 0.5) {
      std::vector<double> trial = scales;
      for (std::size_t j = 0; j < m; ++j) trial[j] = scales[j] * std::exp(step * dx[static_cast<Eigen::Index>(j)]);
      auto ordered = trial;
      std::sort(ordered.begin(), ordered.end());
      if (std::adjacent_find(ordered.begin(), ordered.end()) != ordered.end()) continue;
      RadialField gt;
      const Eigen::VectorXd Ft = residual(trial, gt);
      const double nt = scaled_norm(Ft, trial);
      if (nt < fnorm || ls == 29) {
        improved = nt < fnorm;
        scales = std::move(trial);
        F = Ft;
        g = std::move(gt);
        fnorm = nt;
        break;
      }
    }
    if (!improved) break;
  }
  st.config = BubbleConfig{initial.signs, scales}.sorted();
  st.g = v - multi_bubble(st.config, grid);
  st.ortho_residuals.clear();
  for (double lam : st.config.scales) st.ortho_residuals.push_back(z.pair(st.g, lam));
  st.tolerance = tolerance(st.config.scales, st.g);
  st.converged = !st.singular && st.max_residual() <= st.tolerance;
  st.a_minus = unstable_components(st.g, st.config, eig);
  return st;
}

/// Two-sided bound d_M(v)^2 <= ||g||_E^2 + sum ratios <= C d_M(v)^2: returns the effective C.
inline double fit_bound_constant(const ModulationState& st, double d_m) {
  const double d2 = d_m * d_m;
  return d2 > 0.0 ? st.objective() / d2 : (st.objective() > 0.0 ? infinity : 1.0);
}

} // namespace bubbleflow
