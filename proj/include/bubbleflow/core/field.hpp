#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "bubbleflow/core/error.hpp"
#include "bubbleflow/core/grid.hpp"

namespace bubbleflow {

enum class FieldTag { generic, exact_bubble, exact_multibubble };

/// Real function sampled at the nodes of a RadialGrid.
class RadialField {
public:
  RadialField() = default;

  RadialField(GridPtr grid, std::vector<double> values, FieldTag tag = FieldTag::generic)
      : grid_(std::move(grid)), values_(std::move(values)), tag_(tag) {
    require_domain(grid_ != nullptr, "field needs a grid");
    require_domain(values_.size() == grid_->size(), "field size does not match grid");
  }

  static RadialField zero(GridPtr grid) {
    const auto n = grid->size();
    return RadialField(std::move(grid), std::vector<double>(n, 0.0));
  }

  template <class F>
  static RadialField sample(GridPtr grid, F&& fn, FieldTag tag = FieldTag::generic) {
    std::vector<double> v(grid->size());
    const auto r = grid->nodes();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(r[i]);
    return RadialField(std::move(grid), std::move(v), tag);
  }

  const RadialGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  int dim() const { return grid_->dim(); }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::vector<double>& mutable_values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  FieldTag tag() const { return tag_; }

  bool blown_up() const { return blown_up_; }
  void mark_blown_up() { blown_up_ = true; }

  bool finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
  }

  double linf() const {
    double m = 0.0;
    for (double x : values_) m = std::max(m, std::abs(x));
    return m;
  }

  /// Piecewise-linear interpolation; constant inside the first node, and
  /// linear down to the Dirichlet zero at r_max beyond the last one.
  double at(double r) const {
    const auto nodes = grid_->nodes();
    if (r <= nodes.front()) return values_.front();
    if (r >= grid_->r_max()) return 0.0;
    if (r >= nodes.back()) {
      const double w = (r - nodes.back()) / (grid_->r_max() - nodes.back());
      return (1.0 - w) * values_.back();
    }
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), r);
    const std::size_t k = static_cast<std::size_t>(it - nodes.begin());
    const double w = (r - nodes[k - 1]) / (nodes[k] - nodes[k - 1]);
    return (1.0 - w) * values_[k - 1] + w * values_[k];
  }

  RadialField& operator+=(const RadialField& o) {
    check_same_grid(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    tag_ = FieldTag::generic;
    return *this;
  }
  RadialField& operator-=(const RadialField& o) {
    check_same_grid(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    tag_ = FieldTag::generic;
    return *this;
  }
  RadialField& operator*=(double a) {
    for (double& x : values_) x *= a;
    if (tag_ == FieldTag::exact_bubble) tag_ = FieldTag::generic;
    return *this;
  }

  friend RadialField operator+(RadialField a, const RadialField& b) { return a += b; }
  friend RadialField operator-(RadialField a, const RadialField& b) { return a -= b; }
  friend RadialField operator*(double s, RadialField a) { return a *= s; }

  /// Same values on another grid by linear interpolation.
  RadialField resampled(GridPtr target) const {
    return sample(std::move(target), [this](double r) { return at(r); });
  }

private:
  void check_same_grid(const RadialField& o) const {
    if (o.grid_ != grid_ && !(o.grid_->spec() == grid_->spec()))
      throw DomainError("fields live on different grids");
  }

  GridPtr grid_;
  std::vector<double> values_;
  FieldTag tag_ = FieldTag::generic;
  bool blown_up_ = false;
};

} // namespace bubbleflow
