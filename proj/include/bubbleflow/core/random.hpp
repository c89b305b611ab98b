#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "bubbleflow/core/bubble.hpp"
#include "bubbleflow/core/field.hpp"

namespace bubbleflow {

/// Smooth bump exp(-1/(1 - s^2)) on (lo, hi), s the affine coordinate mapping (lo, hi) to (-1, 1).
struct Bump {
  double lo = 0.0, hi = 1.0;

  double center() const { return 0.5 * (lo + hi); }
  double half_width() const { return 0.5 * (hi - lo); }

  double operator()(double r) const {
    const double s = (r - center()) / half_width();
    if (std::abs(s) >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - s * s));
  }

  double derivative(double r) const {
    const double s = (r - center()) / half_width();
    if (std::abs(s) >= 1.0) return 0.0;
    const double d = 1.0 - s * s;
    return std::exp(-1.0 / d) * (-2.0 * s / (d * d)) / half_width();
  }
};

/// Random sums of bumps. Centres are log-uniform in [r_lo, r_hi]; each bump is
/// scaled to peak spec.amplitude * c^{-(D-2)/2}, so all of them carry comparable energy norm.
struct RandomFieldSpec {
  double r_lo = 0.1;
  double r_hi = 10.0;
  int max_bumps = 4;
  double amplitude = 1.0;
};

inline RadialField random_compact_field(const GridPtr& grid, std::mt19937_64& rng, const RandomFieldSpec& spec = {}) {
  require_domain(spec.r_lo > 0 && spec.r_hi > spec.r_lo, "random field: bad radius range");
  std::uniform_int_distribution<int> count(1, spec.max_bumps);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int k = count(rng);
  std::vector<Bump> bumps;
  std::vector<double> amps;
  const double a = scaling_weight(grid->dim());
  for (int j = 0; j < k; ++j) {
    const double c = spec.r_lo * std::pow(spec.r_hi / spec.r_lo, unit(rng));
    const double w = c * (0.1 + 0.7 * unit(rng));
    bumps.push_back(Bump{c - w, c + w});
    amps.push_back(spec.amplitude * (2.0 * unit(rng) - 1.0) * std::pow(c, -a) * std::exp(1.0));
  }
  return RadialField::sample(grid, [&](double r) {
    double s = 0.0;
    for (std::size_t j = 0; j < bumps.size(); ++j) s += amps[j] * bumps[j](r);
    return s;
  });
}

} // namespace bubbleflow
