#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bubbleflow/core/error.hpp"

namespace bubbleflow {

enum class Grading { uniform, geometric };

inline std::string to_string(Grading g) { return g == Grading::uniform ? "uniform" : "geometric"; }

/// Everything needed to rebuild a grid; this is what manifests and CSV headers store.
struct GridSpec {
  int dimension = 5;
  std::size_t points = 1024;
  double r_max = 1.0e4;
  Grading grading = Grading::geometric;
  double ratio = 1.02; ///< cell-width growth factor q (geometric only)

  bool operator==(const GridSpec&) const = default;
};

/// Measure of the shell (a, b) against r^{D-1} dr.
inline double shell_measure(int dim, double a, double b) {
  return (std::pow(b, dim) - std::pow(a, dim)) / dim;
}

/// Measure of (a, b) against r^{D-3} dr, the weight of the Hardy term u^2/r^2.
inline double hardy_measure(int dim, double a, double b) {
  return (std::pow(b, dim - 2) - std::pow(a, dim - 2)) / (dim - 2);
}

/// Cell-centred radial grid on (0, r_max].
///
/// Cells are [f_{i-1}, f_i] with f_0 = 0 and f_n = r_max; node r_i sits at the
/// midpoint of its cell. Cell widths are constant (uniform) or grow by a fixed
/// factor q (geometric), so the inner region is resolved with n log-spaced decades.
/// Coupling coefficients c_i = f_i^{D-1} / (r_{i+1} - r_i) define the flux-form
/// Laplacian; the last coefficient couples node n to the homogeneous Dirichlet
/// value at r_max. Every quadrature in the library is built from these arrays, so
/// discrete summation by parts holds to rounding.
class RadialGrid {
public:
  explicit RadialGrid(const GridSpec& spec) : spec_(spec) {
    require_domain(spec.dimension >= 3, "grid dimension must be >= 3");
    require_domain(spec.points >= 2, "grid needs at least two nodes");
    require_domain(spec.r_max > 0 && std::isfinite(spec.r_max), "r_max must be positive and finite");
    const std::size_t n = spec.points;
    faces_.resize(n + 1);
    if (spec.grading == Grading::uniform) {
      const double h = spec.r_max / static_cast<double>(n);
      for (std::size_t k = 0; k <= n; ++k) faces_[k] = h * static_cast<double>(k);
    } else {
      require_domain(spec.ratio > 1.0, "geometric grading needs ratio > 1");
      const double q = spec.ratio;
      // f_k = a (q^k - 1)/(q - 1); expm1/log1p keep q close to 1 accurate
      const double lq = std::log1p(q - 1.0);
      const double denom = std::expm1(lq * static_cast<double>(n));
      for (std::size_t k = 0; k <= n; ++k) faces_[k] = spec.r_max * std::expm1(lq * static_cast<double>(k)) / denom;
    }
    faces_[n] = spec.r_max;
    nodes_.resize(n);
    volumes_.resize(n);
    hardy_weights_.resize(n);
    coupling_.resize(n);
    dual_measure_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      nodes_[i] = 0.5 * (faces_[i] + faces_[i + 1]);
      volumes_[i] = shell_measure(dim(), faces_[i], faces_[i + 1]);
      hardy_weights_[i] = hardy_measure(dim(), faces_[i], faces_[i + 1]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double right = (i + 1 < n) ? nodes_[i + 1] : spec.r_max;
      const double face = (i + 1 < n) ? faces_[i + 1] : spec.r_max;
      coupling_[i] = std::pow(face, dim() - 1) / (right - nodes_[i]);
      dual_measure_[i] = shell_measure(dim(), nodes_[i], right);
    }
  }

  /// Grid with a prescribed innermost cell width; the growth factor is solved for.
  static RadialGrid with_inner_width(int dim, std::size_t points, double r_max, double inner_width) {
    require_domain(points >= 2 && r_max > 0 && inner_width > 0, "graded grid: bad arguments");
    GridSpec s{dim, points, r_max, Grading::geometric, 1.0};
    const double target = r_max / inner_width;
    require_domain(target > static_cast<double>(points), "inner width too large for a graded grid");
    // (q^n - 1)/(q - 1) = target, monotone in q
    double lo = 1.0 + 1e-14, hi = 2.0;
    while ((std::pow(hi, points) - 1.0) / (hi - 1.0) < target) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double v = std::expm1(std::log1p(mid - 1.0) * static_cast<double>(points)) / (mid - 1.0);
      (v < target ? lo : hi) = mid;
    }
    s.ratio = 0.5 * (lo + hi);
    return RadialGrid(s);
  }

  const GridSpec& spec() const { return spec_; }
  int dim() const { return spec_.dimension; }
  std::size_t size() const { return nodes_.size(); }
  double r_max() const { return spec_.r_max; }

  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> faces() const { return faces_; }
  /// Shell volume of cell i against r^{D-1} dr.
  std::span<const double> volumes() const { return volumes_; }
  /// Integral of r^{D-3} over cell i.
  std::span<const double> hardy_weights() const { return hardy_weights_; }
  /// Flux coefficient between node i and i+1 (i = n-1: Dirichlet boundary).
  std::span<const double> coupling() const { return coupling_; }
  /// Measure of the dual cell [r_i, r_{i+1}] (i = n-1: [r_n, r_max]).
  std::span<const double> dual_measure() const { return dual_measure_; }

  double node(std::size_t i) const { return nodes_[i]; }
  /// Distance from node i to its right neighbour (or to r_max for the last node).
  double spacing(std::size_t i) const {
    return (i + 1 < size() ? nodes_[i + 1] : spec_.r_max) - nodes_[i];
  }

  /// Number of nodes with r_i <= r.
  std::size_t count_below(double r) const {
    std::size_t k = 0;
    while (k < size() && nodes_[k] <= r) ++k;
    return k;
  }

private:
  GridSpec spec_;
  std::vector<double> faces_, nodes_, volumes_, hardy_weights_, coupling_, dual_measure_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

inline GridPtr make_grid(const GridSpec& spec) { return std::make_shared<const RadialGrid>(spec); }

inline GridPtr make_uniform_grid(int dim, std::size_t points, double r_max) {
  return make_grid(GridSpec{dim, points, r_max, Grading::uniform, 1.0});
}

inline GridPtr make_geometric_grid(int dim, std::size_t points, double r_max, double ratio) {
  return make_grid(GridSpec{dim, points, r_max, Grading::geometric, ratio});
}

inline GridPtr make_graded_grid(int dim, std::size_t points, double r_max, double inner_width) {
  return std::make_shared<const RadialGrid>(RadialGrid::with_inner_width(dim, points, r_max, inner_width));
}

/// Same node pattern stretched by lambda (the "matched mapped grid" of a rescaling).
inline GridPtr scaled_grid(const RadialGrid& g, double lambda) {
  GridSpec s = g.spec();
  s.r_max *= lambda;
  return make_grid(s);
}

} // namespace bubbleflow
