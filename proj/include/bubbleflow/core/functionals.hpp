#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "bubbleflow/core/bubble.hpp"
#include "bubbleflow/core/field.hpp"

namespace bubbleflow {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

namespace detail {

inline double clamp_hi(const RadialGrid& g, double r2) { return std::isinf(r2) ? g.r_max() : std::min(r2, g.r_max()); }

inline void check_window(double r1, double r2) {
  require_domain(r1 >= 0.0 && r1 < r2, "window needs 0 <= r1 < r2");
}

/// Fraction of the r^{D-1} measure of [lo, hi] lying in [a, b].
inline double shell_fraction(int dim, double lo, double hi, double a, double b, double total) {
  const double x = std::max(lo, a), y = std::min(hi, b);
  if (y <= x || total <= 0.0) return 0.0;
  if (x == lo && y == hi) return 1.0;
  return shell_measure(dim, x, y) / total;
}

/// Difference u_{i+1} - u_i across dual cell i, with the Dirichlet ghost u_{n+1} = 0.
inline double jump(std::span<const double> u, std::size_t i) {
  return (i + 1 < u.size() ? u[i + 1] : 0.0) - u[i];
}

} // namespace detail

/// <a|b> = sum_i V_i a_i b_i, the discrete L^2(r^{D-1} dr) pairing.
inline double inner(const RadialField& a, const RadialField& b) {
  require_domain(a.size() == b.size(), "pairing of fields with different sizes");
  const auto v = a.grid().volumes();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += v[i] * a[i] * b[i];
  return s;
}

inline double l2_norm_sq(const RadialField& a, double r_hi = infinity) {
  const auto& g = a.grid();
  const auto f = g.faces();
  const auto v = g.volumes();
  const double b = detail::clamp_hi(g, r_hi);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size() && f[i] < b; ++i)
    s += v[i] * detail::shell_fraction(g.dim(), f[i], f[i + 1], 0.0, b, v[i]) * a[i] * a[i];
  return s;
}

inline double l2_norm(const RadialField& a, double r_hi = infinity) { return std::sqrt(l2_norm_sq(a, r_hi)); }

/// Flux-form Laplacian (Delta_h u)_i = [c_i (u_{i+1}-u_i) - c_{i-1}(u_i - u_{i-1})]/V_i,
/// zero flux through r = 0 and u = 0 beyond r_max.
inline std::vector<double> laplacian_values(const RadialGrid& g, std::span<const double> u) {
  const auto c = g.coupling();
  const auto v = g.volumes();
  const std::size_t n = g.size();
  std::vector<double> out(n);
  double left_flux = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double right_flux = c[i] * detail::jump(u, i);
    out[i] = (right_flux - left_flux) / v[i];
    left_flux = right_flux;
  }
  return out;
}

inline RadialField laplacian(const RadialField& u) {
  return RadialField(u.grid_ptr(), laplacian_values(u.grid(), u.values()));
}

/// T(u) = Delta_h u + |u|^{4/(D-2)} u with the solver's operator.
inline RadialField tension(const RadialField& u) {
  auto t = laplacian_values(u.grid(), u.values());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] += nonlinearity(u.dim(), u[i]);
  return RadialField(u.grid_ptr(), std::move(t));
}

/// Integral of (d_r u)^2 r^{D-1} over (r1, r2); jumps are spread over their dual cells by measure.
inline double gradient_energy(const RadialField& u, double r1 = 0.0, double r2 = infinity) {
  detail::check_window(r1, r2);
  const auto& g = u.grid();
  const auto c = g.coupling();
  const auto nd = g.nodes();
  const auto dm = g.dual_measure();
  const double b = detail::clamp_hi(g, r2);
  const auto vals = u.values();
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double hi = i + 1 < u.size() ? nd[i + 1] : g.r_max();
    if (hi <= r1) continue;
    if (nd[i] >= b) break;
    const double j = detail::jump(vals, i);
    s += c[i] * j * j * detail::shell_fraction(g.dim(), nd[i], hi, r1, b, dm[i]);
  }
  return s;
}

/// Integral of u^2/r^2 r^{D-1} over (r1, r2), cell values against exact r^{D-3} weights.
inline double hardy_energy(const RadialField& u, double r1 = 0.0, double r2 = infinity) {
  detail::check_window(r1, r2);
  const auto& g = u.grid();
  const auto f = g.faces();
  const auto hw = g.hardy_weights();
  const double b = detail::clamp_hi(g, r2);
  const int dim = g.dim();
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (f[i + 1] <= r1) continue;
    if (f[i] >= b) break;
    double w = hw[i];
    if (f[i] < r1 || f[i + 1] > b) {
      const double x = std::max(f[i], r1), y = std::min(f[i + 1], b);
      w = hardy_measure(dim, x, y);
    }
    s += w * u[i] * u[i];
  }
  return s;
}

/// Integral of |u|^{2*}/2* r^{D-1} over (r1, r2).
inline double potential_energy(const RadialField& u, double r1 = 0.0, double r2 = infinity) {
  detail::check_window(r1, r2);
  const auto& g = u.grid();
  const auto f = g.faces();
  const auto v = g.volumes();
  const double b = detail::clamp_hi(g, r2);
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (f[i + 1] <= r1) continue;
    if (f[i] >= b) break;
    s += v[i] * detail::shell_fraction(g.dim(), f[i], f[i + 1], r1, b, v[i]) * potential(g.dim(), u[i]);
  }
  return s;
}

/// E(u; r1, r2). r2 = infinity stands for r_max (fields vanish beyond it).
inline double local_energy(const RadialField& u, double r1, double r2) {
  return 0.5 * gradient_energy(u, r1, r2) - potential_energy(u, r1, r2);
}

inline double energy(const RadialField& u) { return local_energy(u, 0.0, infinity); }

inline double enorm_sq(const RadialField& u, double r1 = 0.0, double r2 = infinity) {
  return gradient_energy(u, r1, r2) + hardy_energy(u, r1, r2);
}

/// ||u||_E(r1, r2) = (int ((d_r u)^2 + u^2/r^2) r^{D-1} dr)^{1/2}.
inline double enorm(const RadialField& u, double r1 = 0.0, double r2 = infinity) {
  return std::sqrt(enorm_sq(u, r1, r2));
}

/// Discrete L^2 norm of T(u) on (0, r_hi).
inline double tension_l2(const RadialField& u, double r_hi = infinity) { return l2_norm(tension(u), r_hi); }

// Closed forms for the bubble, from int_0^inf r^a (1 + r^2/k)^{-b} dr = k^{(a+1)/2} B((a+1)/2, b-(a+1)/2)/2.
namespace detail {
inline double bubble_integral(double a, double b, double k) {
  const double x = 0.5 * (a + 1.0);
  return 0.5 * std::pow(k, x) * std::beta(x, b - x);
}
} // namespace detail

/// int (W')^2 r^{D-1} dr, equal to int W^{2*} r^{D-1} dr.
inline double bubble_gradient_sq(int dim) {
  require_domain(dim >= 3, "bubble constants need D >= 3");
  const double k = dim * (dim - 2.0);
  return std::pow((dim - 2.0) / k, 2) * detail::bubble_integral(dim + 1.0, dim, k);
}

/// int W^2/r^2 r^{D-1} dr.
inline double bubble_hardy_sq(int dim) {
  require_domain(dim >= 3, "bubble constants need D >= 3");
  const double k = dim * (dim - 2.0);
  return detail::bubble_integral(dim - 3.0, dim - 2.0, k);
}

inline double bubble_energy(int dim) { return bubble_gradient_sq(dim) / dim; }
inline double bubble_enorm(int dim) { return std::sqrt(bubble_gradient_sq(dim) + bubble_hardy_sq(dim)); }

/// Leading-order gradient energy of W_lambda beyond R >> lambda, using
/// W ~ (D(D-2))^{(D-2)/2} lambda^{(D-2)/2} r^{-(D-2)}. Bounds the truncation of
/// the W-type tail at r_max.
inline double bubble_tail_gradient_sq(int dim, double lambda, double R) {
  const double k = dim * (dim - 2.0);
  const double amp2 = std::pow(k, dim - 2.0) * std::pow(lambda, dim - 2.0);
  return (dim - 2.0) * amp2 * std::pow(R, -(dim - 2.0));
}

} // namespace bubbleflow
