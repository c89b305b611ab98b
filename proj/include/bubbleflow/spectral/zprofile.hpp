#pragma once

#include <algorithm>
#include <cmath>

#include "bubbleflow/core/random.hpp"
#include "bubbleflow/spectral/linearized.hpp"

namespace bubbleflow {

/// Signed profile Z = sigma (b1 - beta b2) with beta chosen so <Z|Y> = 0 and
/// sigma so that <Z|Lambda W> > 0. A non-negative Z cannot be orthogonal to the
/// positive ground state Y, hence the two lobes.
class ZProfile {
public:
  ZProfile() = default;
  ZProfile(int dim, Bump first, Bump second, double beta, double sign)
      : dim_(dim), b1_(first), b2_(second), beta_(beta), sign_(sign) {}

  int dim() const { return dim_; }
  double beta() const { return beta_; }
  double sign() const { return sign_; }
  const Bump& first() const { return b1_; }
  const Bump& second() const { return b2_; }
  double support_lo() const { return b1_.lo; }
  double support_hi() const { return b2_.hi; }

  double operator()(double r) const { return sign_ * (b1_(r) - beta_ * b2_(r)); }
  double derivative(double r) const { return sign_ * (b1_.derivative(r) - beta_ * b2_.derivative(r)); }
  /// (underline-Lambda Z)(r) = r Z'(r) + (D/2) Z(r).
  double generator(double r) const { return r * derivative(r) + 0.5 * dim_ * (*this)(r); }

  /// lambda^{-D/2} Z(r/lambda) on `grid`.
  RadialField sample(const GridPtr& grid, double lambda = 1.0) const {
    const double amp = std::pow(lambda, -0.5 * dim_);
    return RadialField::sample(grid, [&](double r) { return amp * (*this)(r / lambda); });
  }

  /// <Z_lambda | g> with the L^2-invariant rescaling; only support nodes are visited.
  double pair(const RadialField& g, double lambda = 1.0) const {
    return pair_profile(g, lambda, [this](double s) { return (*this)(s); });
  }

  /// <(underline-Lambda Z)_lambda | g>.
  double pair_generator(const RadialField& g, double lambda = 1.0) const {
    return pair_profile(g, lambda, [this](double s) { return generator(s); });
  }

  /// sum_i V_i (lambda^{-D/2} Z(r_i/lambda))^2
  double norm_sq(const RadialGrid& grid, double lambda = 1.0) const {
    const auto r = grid.nodes();
    const auto vol = grid.volumes();
    const double amp = std::pow(lambda, -0.5 * dim_);
    double s = 0.0;
    for (std::size_t i = first_node(grid, lambda); i < r.size() && r[i] < support_hi() * lambda; ++i) {
      const double z = amp * (*this)(r[i] / lambda);
      s += vol[i] * z * z;
    }
    return s;
  }

private:
  std::size_t first_node(const RadialGrid& grid, double lambda) const {
    const auto r = grid.nodes();
    return static_cast<std::size_t>(std::lower_bound(r.begin(), r.end(), support_lo() * lambda) - r.begin());
  }

  template <class F>
  double pair_profile(const RadialField& g, double lambda, F&& fn) const {
    const auto& grid = g.grid();
    const auto r = grid.nodes();
    const auto vol = grid.volumes();
    const double amp = std::pow(lambda, -0.5 * dim_);
    double s = 0.0;
    for (std::size_t i = first_node(grid, lambda); i < r.size() && r[i] < support_hi() * lambda; ++i)
      s += vol[i] * fn(r[i] / lambda) * g[i];
    return amp * s;
  }

  int dim_ = 0;
  Bump b1_{0.5, 1.0}, b2_{1.5, 2.5};
  double beta_ = 0.0;
  double sign_ = 1.0;
};

struct ZProfileReport {
  ZProfile profile;
  double y_residual = 0.0;  ///< <Z|Y> on the eigen-grid
  double lambda_w = 0.0;    ///< <Z|Lambda W> on the eigen-grid
};

inline ZProfileReport build_z_profile(int dim, const Eigenpair& eig, Bump first = {0.5, 1.0}, Bump second = {1.5, 2.5}) {
  require_domain(dim >= 3 && eig.dim == dim, "Z profile: dimension mismatch");
  const auto& grid = eig.y.grid_ptr();
  require_domain(second.hi < grid->r_max() && first.lo > 0.0, "Z profile support must lie inside the eigen-grid");
  const auto b1 = RadialField::sample(grid, first);
  const auto b2 = RadialField::sample(grid, second);
  const double p1 = inner(b1, eig.y), p2 = inner(b2, eig.y);
  if (!(std::abs(p2) > 0.0)) throw NumericalError("Z profile: second lobe does not see Y");
  const double beta = p1 / p2;
  const auto lw = RadialField::sample(grid, [dim](double r) { return eval_lambda_bubble(dim, r); });
  const double q = inner(b1, lw) - beta * inner(b2, lw);
  if (!(std::abs(q) > 1e-12)) throw NumericalError("Z profile: balance leaves <Z|Lambda W> = 0");
  ZProfileReport rep;
  rep.profile = ZProfile(dim, first, second, beta, q > 0.0 ? 1.0 : -1.0);
  const auto z = rep.profile.sample(grid);
  rep.y_residual = inner(z, eig.y);
  rep.lambda_w = inner(z, lw);
  return rep;
}

/// <Y_lambda | g> with the L^2-invariant rescaling lambda^{-D/2} Y(r/lambda).
inline double pair_y(const Eigenpair& eig, const RadialField& g, double lambda = 1.0) {
  const auto r = g.grid().nodes();
  const auto vol = g.grid().volumes();
  const double cut = eig.y.grid().r_max() * lambda;
  double s = 0.0;
  for (std::size_t i = 0; i < r.size() && r[i] < cut; ++i) s += vol[i] * eig.y_at(r[i] / lambda) * g[i];
  return std::pow(lambda, -0.5 * eig.dim) * s;
}

} // namespace bubbleflow
