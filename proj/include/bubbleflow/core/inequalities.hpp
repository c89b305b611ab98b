#pragma once

#include <cmath>

#include "bubbleflow/core/functionals.hpp"

namespace bubbleflow {

struct InequalitySides {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds() const { return lhs <= rhs; }
};

/// |v(R)| against sqrt(2) R^{-(D-2)/2} ||v||_E(R, inf).
inline InequalitySides radial_sobolev_bound(const RadialField& v, double R) {
  require_domain(R > 0.0, "radial Sobolev needs R > 0");
  InequalitySides s;
  s.lhs = std::abs(v.at(R));
  if (R >= v.grid().r_max()) return s;
  s.rhs = std::sqrt(2.0) * std::pow(R, -scaling_weight(v.dim())) * enorm(v, R, infinity);
  return s;
}

/// Hardy constant 4/(D-2)^2 on exterior domains.
inline double hardy_constant(int dim) {
  require_domain(dim >= 3, "Hardy constant needs D >= 3");
  return 4.0 / ((dim - 2.0) * (dim - 2.0));
}

/// (int_R^inf v^2/r^2, 4/(D-2)^2 int_R^inf (d_r v)^2), both against r^{D-1} dr.
inline InequalitySides hardy_tail_constant_check(const RadialField& v, double R) {
  require_domain(R >= 0.0, "Hardy tail needs R >= 0");
  InequalitySides s;
  if (R >= v.grid().r_max()) return s;
  s.lhs = hardy_energy(v, R, infinity);
  s.rhs = hardy_constant(v.dim()) * gradient_energy(v, R, infinity);
  return s;
}

/// C = C3^{-1} / (4 (1 + C3^{-1})) with C3^{-1} = (D-2)^2/4.
inline double trapping_constant(int dim) {
  const double c3inv = 1.0 / hardy_constant(dim);
  return c3inv / (4.0 * (1.0 + c3inv));
}

/// Default smallness threshold: a tenth of the bubble's energy norm.
inline double default_trapping_delta(int dim) { return 0.1 * bubble_enorm(dim); }

struct TrappingResult {
  double energy = 0.0;
  double enorm2 = 0.0;
  double constant = 0.0;
  bool certified = false;
  /// energy >= constant * enorm2; meaningful only when certified.
  bool bound_holds() const { return energy >= constant * enorm2; }
};

inline TrappingResult trapping_bound(const RadialField& v, double R, double delta0) {
  require_domain(R >= 0.0, "trapping needs R >= 0");
  require_domain(delta0 > 0.0, "trapping threshold must be positive");
  TrappingResult t;
  t.constant = trapping_constant(v.dim());
  if (R >= v.grid().r_max()) {
    t.certified = true;
    return t;
  }
  t.energy = local_energy(v, R, infinity);
  t.enorm2 = enorm_sq(v, R, infinity);
  t.certified = std::sqrt(t.enorm2) <= delta0;
  return t;
}

inline TrappingResult trapping_bound(const RadialField& v, double R) {
  return trapping_bound(v, R, default_trapping_delta(v.dim()));
}

} // namespace bubbleflow
