#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "bubbleflow/core/random.hpp"
#include "bubbleflow/spectral/zprofile.hpp"

namespace bubbleflow {

struct CoercivityResult {
  double form = 0.0;         ///< <L_W g|g> + sum_j (lambda_j^{-1} <Y_lambda_j|g>)^2
  double lower_bound = 0.0;  ///< c0 ||g||_E^2
  double enorm2 = 0.0;
  std::vector<double> z_pairings;
  bool orthogonal = true;    ///< hypothesis <Z_lambda_j|g> = 0 for all j

  bool holds() const { return form >= lower_bound; }
  double ratio() const { return enorm2 > 0.0 ? form / enorm2 : 0.0; }
};

/// Tolerance for the orthogonality hypothesis, relative to ||g||_{L^2} ||Z_lambda||_{L^2}.
inline constexpr double default_ortho_tol = 1e-8;

/// The Y term uses lambda_j^{-1} Y_lambda_j, the normalisation that makes
/// <., g>^2 invariant under the energy-critical rescaling of g (as in a_j^-).
inline CoercivityResult coercivity_form(const RadialField& g, const BubbleConfig& config, const Eigenpair& eig,
                                        const ZProfile& z, double c0, double ortho_tol = default_ortho_tol) {
  config.validate();
  CoercivityResult res;
  const auto op = LinearizedOperator::about(config, g.grid_ptr());
  res.form = op.quadratic_form(g);
  const double gl2 = l2_norm(g);
  for (std::size_t j = 0; j < config.size(); ++j) {
    const double lam = config.scales[j];
    const double y = pair_y(eig, g, lam) / lam;
    res.form += y * y;
    const double zp = z.pair(g, lam);
    res.z_pairings.push_back(zp);
    const double scale = gl2 * std::sqrt(z.norm_sq(g.grid(), lam));
    if (std::abs(zp) > ortho_tol * scale) res.orthogonal = false;
  }
  res.enorm2 = enorm_sq(g);
  res.lower_bound = c0 * res.enorm2;
  return res;
}

/// Projects g onto {<Z_lambda_j|g> = 0 for all j} along the Z_lambda_j themselves.
inline RadialField project_z_orthogonal(RadialField g, const BubbleConfig& config, const ZProfile& z) {
  const std::size_t m = config.size();
  if (m == 0) return g;
  std::vector<RadialField> zs;
  for (double lam : config.scales) zs.push_back(z.sample(g.grid_ptr(), lam));
  // Gram system is diagonal up to the tiny overlaps of well separated scales; iterate to converge
  for (int sweep = 0; sweep < 20; ++sweep) {
    double worst = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double a = inner(zs[j], g) / inner(zs[j], zs[j]);
      g -= a * zs[j];
      worst = std::max(worst, std::abs(a));
    }
    if (worst < 1e-17) break;
  }
  return g;
}

struct CoercivityCalibration {
  double min_ratio = 0.0;
  double c0 = 0.0;  ///< min_ratio / 2
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

/// c0 from a randomized corpus of Z-orthogonal fields around the unit bubble, on the eigen-grid.
inline CoercivityCalibration calibrate_c0(const Eigenpair& eig, const ZProfile& z, std::size_t samples = 100,
                                          std::uint64_t seed = 12345) {
  CoercivityCalibration cal;
  cal.samples = samples;
  cal.seed = seed;
  cal.min_ratio = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  const BubbleConfig one{{1}, {1.0}};
  for (std::size_t k = 0; k < samples; ++k) {
    const auto g = project_z_orthogonal(random_compact_field(eig.y.grid_ptr(), rng), one, z);
    const auto res = coercivity_form(g, one, eig, z, 0.0);
    if (res.enorm2 > 0.0) cal.min_ratio = std::min(cal.min_ratio, res.ratio());
  }
  cal.c0 = 0.5 * cal.min_ratio;
  return cal;
}

enum class LocalisationKind { global, outer, inner };

/// Localised forms of the single-bubble coercivity:
///  global: <L g|g> - c ||g||_E^2
///  outer : (1-2c) int_0^R g_r^2 + c int_R^inf g_r^2 - int f'(W) g^2
///  inner : (1-2c) int_R^inf g_r^2 + c int_0^R g_r^2 - int f'(W) g^2
/// (all against r^{D-1} dr). The lemma's claim is lhs >= -C (<Z|g>^2 + <Y|g>^2);
/// effective_C reports the smallest C that works for this g.
struct LocalisedCoercivity {
  double lhs = 0.0;
  double z_sq = 0.0;
  double y_sq = 0.0;

  double effective_C() const {
    if (lhs >= 0.0) return 0.0;
    const double d = z_sq + y_sq;
    return d > 0.0 ? -lhs / d : std::numeric_limits<double>::infinity();
  }
};

inline LocalisedCoercivity localised_coercivity(const RadialField& g, const Eigenpair& eig, const ZProfile& z,
                                                LocalisationKind kind, double R, double c) {
  require_domain(c > 0.0 && c < 0.5, "localised coercivity needs 0 < c < 1/2");
  const auto op = LinearizedOperator::about_bubble(g.grid_ptr());
  const auto vol = g.grid().volumes();
  double pot = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) pot += vol[i] * op.potential()[i] * g[i] * g[i];
  LocalisedCoercivity out;
  switch (kind) {
  case LocalisationKind::global:
    out.lhs = op.quadratic_form(g) - c * enorm_sq(g);
    break;
  case LocalisationKind::outer:
    require_domain(R > 0.0, "localisation radius must be positive");
    out.lhs = (1.0 - 2.0 * c) * gradient_energy(g, 0.0, R) + c * gradient_energy(g, R, infinity) - pot;
    break;
  case LocalisationKind::inner:
    require_domain(R > 0.0, "localisation radius must be positive");
    out.lhs = (1.0 - 2.0 * c) * gradient_energy(g, R, infinity) + c * gradient_energy(g, 0.0, R) - pot;
    break;
  }
  const double zp = z.pair(g), yp = pair_y(eig, g);
  out.z_sq = zp * zp;
  out.y_sq = yp * yp;
  return out;
}

} // namespace bubbleflow
