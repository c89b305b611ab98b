#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "bubbleflow/core/bubble.hpp"
#include "bubbleflow/core/functionals.hpp"

namespace bubbleflow {

/// Symmetric tridiagonal matrix: diag[0..n), off[0..n-1) below/above the diagonal.
struct SymTridiagonal {
  std::vector<double> diag, off;

  std::size_t size() const { return diag.size(); }

  /// Number of eigenvalues strictly below sigma (Sturm sequence via LDL^T pivots).
  std::size_t count_below(double sigma) const {
    std::size_t neg = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < diag.size(); ++i) {
      const double b2 = i > 0 ? off[i - 1] * off[i - 1] : 0.0;
      q = diag[i] - sigma - (i > 0 ? b2 / q : 0.0);
      if (q == 0.0) q = -1e-300;
      if (q < 0.0) ++neg;
    }
    return neg;
  }

  double gershgorin_lower() const {
    double lo = diag.empty() ? 0.0 : diag[0];
    for (std::size_t i = 0; i < diag.size(); ++i) {
      const double l = i > 0 ? std::abs(off[i - 1]) : 0.0;
      const double r = i + 1 < diag.size() ? std::abs(off[i]) : 0.0;
      lo = std::min(lo, diag[i] - l - r);
    }
    return lo;
  }

  /// Solves (T - shift I) x = rhs by Gaussian elimination with partial pivoting.
  std::vector<double> solve_shifted(double shift, std::vector<double> rhs) const {
    const std::size_t n = size();
    std::vector<double> d(n), du(n, 0.0), du2(n, 0.0), dl(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) d[i] = diag[i] - shift;
    for (std::size_t i = 0; i + 1 < n; ++i) du[i] = dl[i] = off[i];
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (std::abs(dl[i]) > std::abs(d[i])) {
        // swap rows i and i+1
        std::swap(d[i], dl[i]);
        const double t = du[i];
        du[i] = d[i + 1];
        d[i + 1] = t;
        if (i + 2 < n) {
          du2[i] = du[i + 1];
          du[i + 1] = 0.0;
        }
        std::swap(rhs[i], rhs[i + 1]);
      }
      if (d[i] == 0.0) d[i] = 1e-300;
      const double m = dl[i] / d[i];
      d[i + 1] -= m * du[i];
      if (i + 2 < n) du[i + 1] -= m * du2[i];
      rhs[i + 1] -= m * rhs[i];
      dl[i] = m;
    }
    if (d[n - 1] == 0.0) d[n - 1] = 1e-300;
    std::vector<double> x(n);
    for (std::size_t k = n; k-- > 0;) {
      double s = rhs[k];
      if (k + 1 < n) s -= du[k] * x[k + 1];
      if (k + 2 < n) s -= du2[k] * x[k + 2];
      x[k] = s / d[k];
    }
    return x;
  }
};

/// Discrete L_V = -Delta_h - V(r) on a RadialGrid. With A the stiffness matrix
/// (A_ii = c_{i-1} + c_i - V_i f'_i, A_{i,i+1} = -c_i) the action is (A v)_i / V_i,
/// so L is self-adjoint for the pairing sum_i V_i a_i b_i.
class LinearizedOperator {
public:
  LinearizedOperator(GridPtr grid, std::vector<double> potential)
      : grid_(std::move(grid)), potential_(std::move(potential)) {
    require_domain(grid_ && potential_.size() == grid_->size(), "operator potential does not match grid");
  }

  /// -Delta - f'(background).
  static LinearizedOperator about(const RadialField& background) {
    std::vector<double> p(background.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = nonlinearity_derivative(background.dim(), background[i]);
    return LinearizedOperator(background.grid_ptr(), std::move(p));
  }

  static LinearizedOperator about(const BubbleConfig& c, const GridPtr& grid) {
    return about(multi_bubble(c, grid));
  }

  static LinearizedOperator about_bubble(const GridPtr& grid, double lambda = 1.0) {
    return about(bubble_field(grid, lambda));
  }

  const RadialGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::span<const double> potential() const { return potential_; }

  RadialField apply(const RadialField& v) const {
    auto out = laplacian_values(*grid_, v.values());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = -out[i] - potential_[i] * v[i];
    return RadialField(grid_, std::move(out));
  }

  /// <L v | v> = sum c_i (v_{i+1} - v_i)^2 - sum V_i f'_i v_i^2, the discrete
  /// int ((d_r v)^2 - f' v^2) r^{D-1} dr.
  double quadratic_form(const RadialField& v) const {
    const auto vol = grid_->volumes();
    double s = gradient_energy(v);
    for (std::size_t i = 0; i < v.size(); ++i) s -= vol[i] * potential_[i] * v[i] * v[i];
    return s;
  }

  /// V^{-1/2} A V^{-1/2}; same spectrum as L.
  SymTridiagonal symmetrized() const {
    const auto c = grid_->coupling();
    const auto vol = grid_->volumes();
    const std::size_t n = grid_->size();
    SymTridiagonal t;
    t.diag.resize(n);
    t.off.resize(n > 0 ? n - 1 : 0);
    for (std::size_t i = 0; i < n; ++i) {
      const double left = i > 0 ? c[i - 1] : 0.0;
      t.diag[i] = (left + c[i]) / vol[i] - potential_[i];
      if (i + 1 < n) t.off[i] = -c[i] / std::sqrt(vol[i] * vol[i + 1]);
    }
    return t;
  }

  std::size_t count_below(double sigma) const { return symmetrized().count_below(sigma); }

private:
  GridPtr grid_;
  std::vector<double> potential_;
};

/// The negative eigenvalue -kappa^2 of L = -Delta - f'(W) and its eigenfunction Y,
/// normalised so that sum V_i Y_i^2 = 1 and Y > 0.
struct Eigenpair {
  int dim = 0;
  double kappa = 0.0;
  double eigenvalue = 0.0;
  std::size_t negative_count = 0;
  RadialField y;

  /// Y at radius r by linear interpolation; zero beyond the eigen-grid.
  double y_at(double r) const { return r >= y.grid().r_max() ? 0.0 : y.at(r); }

  /// L^2-invariant rescaling lambda^{-D/2} Y(r/lambda) sampled on `grid`.
  RadialField y_scaled(const GridPtr& grid, double lambda = 1.0) const {
    const double amp = std::pow(lambda, -0.5 * dim);
    return RadialField::sample(grid, [&](double r) { return amp * y_at(r / lambda); });
  }
};

/// Base eigen-grid; Y decays like exp(-kappa r), so r_max = 80 truncates below rounding for D <= 6.
struct EigenGridSpec {
  std::size_t points = 8192;
  double r_max = 80.0;
  double ratio = 1.0008;
};

inline GridPtr eigen_grid(int dim, const EigenGridSpec& s = {}) {
  return make_geometric_grid(dim, s.points, s.r_max, s.ratio);
}

/// The same smooth map with twice the cells: n -> 2n, q -> sqrt(q); faces nest.
inline EigenGridSpec refined(const EigenGridSpec& s) {
  return EigenGridSpec{2 * s.points, s.r_max, std::sqrt(s.ratio)};
}

inline GridPtr default_eigen_grid(int dim) { return eigen_grid(dim, refined(EigenGridSpec{})); }

inline constexpr std::size_t min_core_nodes = 32;

/// Counts negative eigenvalues below -band (the Dirichlet truncation pushes the
/// dilation mode slightly above zero; band keeps roundoff from counting it).
inline Eigenpair negative_eigenpair(const LinearizedOperator& op, double band = 1e-6) {
  const auto& g = op.grid();
  const int dim = g.dim();
  require_domain(g.count_below(std::sqrt(dim * (dim - 2.0))) >= min_core_nodes,
                 "eigen-grid does not resolve the bubble core");
  const auto t = op.symmetrized();
  Eigenpair e;
  e.dim = dim;
  e.negative_count = t.count_below(-band);
  if (e.negative_count != 1)
    throw NumericalError("expected exactly one negative eigenvalue, found " + std::to_string(e.negative_count));

  double lo = t.gershgorin_lower(), hi = -band;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (t.count_below(mid) >= 1 ? hi : lo) = mid;
  }
  const double mu = 0.5 * (lo + hi);

  std::vector<double> w(t.size(), 1.0);
  for (int it = 0; it < 6; ++it) {
    w = t.solve_shifted(mu * (1.0 + 1e-12), std::move(w));
    double nrm = 0.0;
    for (double x : w) nrm += x * x;
    nrm = std::sqrt(nrm);
    for (double& x : w) x /= nrm;
  }
  const auto vol = g.volumes();
  std::vector<double> y(w.size());
  double mass = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = w[i] / std::sqrt(vol[i]);
    mass += vol[i] * y[i];
  }
  if (mass < 0.0)
    for (double& x : y) x = -x;
  e.y = RadialField(op.grid_ptr(), std::move(y));
  const double nrm2 = inner(e.y, e.y);
  e.y *= 1.0 / std::sqrt(nrm2);
  // Rayleigh quotient through the quadratic form avoids cancellation in A y on tiny cells
  e.eigenvalue = op.quadratic_form(e.y);
  if (!(e.eigenvalue < 0.0)) throw NumericalError("negative eigenpair: inverse iteration failed");
  e.kappa = std::sqrt(-e.eigenvalue);
  return e;
}

inline Eigenpair negative_eigenpair(int dim, const GridPtr& grid) {
  require_domain(dim >= 3, "eigen-solve needs D >= 3");
  require_domain(grid->dim() == dim, "eigen-grid dimension mismatch");
  return negative_eigenpair(LinearizedOperator::about_bubble(grid));
}

inline Eigenpair negative_eigenpair(int dim) {
  require_domain(dim >= 3, "eigen-solve needs D >= 3");
  return negative_eigenpair(dim, default_eigen_grid(dim));
}

/// Eigen-solve on a grid and its refinement. The discretisation error of the
/// cell-centred scheme on a fixed smooth map expands in even powers of 1/n, so
/// (4 x_fine - x_coarse)/3 removes the leading term of kappa^2 and of <Y|Lambda W>.
struct SpectrumReport {
  int dim = 0;
  EigenGridSpec grid;
  double kappa2 = 0.0;
  double kappa2_coarse = 0.0;
  double kappa2_fine = 0.0;
  double y_lambda_w = 0.0; ///< <Y|Lambda W>, extrapolated
  std::size_t negative_count_coarse = 0;
  std::size_t negative_count_fine = 0;
  Eigenpair eigen; ///< fine-level Y, eigenvalue set to -kappa2

  double refinement_change() const { return std::abs(kappa2_fine / kappa2_coarse - 1.0); }
};

inline SpectrumReport solve_spectrum(int dim, const EigenGridSpec& spec = {}) {
  require_domain(dim >= 3, "eigen-solve needs D >= 3");
  auto pairing = [dim](const Eigenpair& e) {
    return inner(e.y, RadialField::sample(e.y.grid_ptr(), [dim](double r) { return eval_lambda_bubble(dim, r); }));
  };
  SpectrumReport rep;
  rep.dim = dim;
  rep.grid = spec;
  const auto coarse = negative_eigenpair(dim, eigen_grid(dim, spec));
  auto fine = negative_eigenpair(dim, eigen_grid(dim, refined(spec)));
  rep.negative_count_coarse = coarse.negative_count;
  rep.negative_count_fine = fine.negative_count;
  rep.kappa2_coarse = -coarse.eigenvalue;
  rep.kappa2_fine = -fine.eigenvalue;
  rep.kappa2 = (4.0 * rep.kappa2_fine - rep.kappa2_coarse) / 3.0;
  rep.y_lambda_w = (4.0 * pairing(fine) - pairing(coarse)) / 3.0;
  fine.eigenvalue = -rep.kappa2;
  fine.kappa = std::sqrt(rep.kappa2);
  rep.eigen = std::move(fine);
  return rep;
}

} // namespace bubbleflow
