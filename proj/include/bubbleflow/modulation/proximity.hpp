#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "bubbleflow/core/functionals.hpp"

namespace bubbleflow {

/// (x)^{-(D-2)/2} without pow for the common dimensions.
inline double bubble_power(int dim, double x) {
  switch (dim) {
  case 3: return 1.0 / std::sqrt(x);
  case 4: return 1.0 / x;
  case 5: return 1.0 / (x * std::sqrt(x));
  case 6: return 1.0 / (x * x);
  default: return std::pow(x, -scaling_weight(dim));
  }
}

/// Sum of (lambda_j / lambda_{j+1})^{(D-2)/2} over j = 0..M with lambda_0 = lower and
/// lambda_{M+1} = upper; terms with lambda_0 = 0 or lambda_{M+1} = infinity vanish.
inline double ratio_penalty(int dim, const std::vector<double>& scales, double lower = 0.0, double upper = infinity) {
  const double a = scaling_weight(dim);
  std::vector<double> s;
  s.reserve(scales.size() + 2);
  s.push_back(lower);
  s.insert(s.end(), scales.begin(), scales.end());
  s.push_back(upper);
  double sum = 0.0;
  for (std::size_t j = 0; j + 1 < s.size(); ++j) {
    if (s[j] <= 0.0 || std::isinf(s[j + 1])) continue;
    sum += std::pow(s[j] / s[j + 1], a);
  }
  return sum;
}

/// The objective ||v - W(iota, lambda)||_E^2(r_lo, r_hi) + ratio_penalty(lambda; lower, upper)
/// with the window weights of gradient_energy/hardy_energy precomputed.
class ProximityObjective {
public:
  ProximityObjective(RadialField v, double r_lo, double r_hi, double lower, double upper)
      : v_(std::move(v)), r_lo_(r_lo), r_hi_(r_hi), lower_(lower), upper_(upper) {
    require_domain(r_lo >= 0.0 && r_lo < r_hi, "proximity window needs 0 <= r_lo < r_hi");
    const auto& g = v_.grid();
    const std::size_t n = g.size();
    const auto nd = g.nodes();
    const auto f = g.faces();
    const auto c = g.coupling();
    const auto dm = g.dual_measure();
    const double b = detail::clamp_hi(g, r_hi);
    gw_.assign(n, 0.0);
    hw_.assign(n, 0.0);
    r2_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      r2_[i] = nd[i] * nd[i];
      const double hi = i + 1 < n ? nd[i + 1] : g.r_max();
      gw_[i] = c[i] * detail::shell_fraction(g.dim(), nd[i], hi, r_lo, b, dm[i]);
      const double x = std::max(f[i], r_lo), y = std::min(f[i + 1], b);
      if (y > x) hw_[i] = hardy_measure(g.dim(), x, y);
    }
    work_.resize(n);
  }

  const RadialField& field() const { return v_; }
  int dim() const { return v_.dim(); }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  double r_lo() const { return r_lo_; }
  double r_hi() const { return r_hi_; }

  /// Objective at (signs, scales); scales need not be sorted, the penalty uses sorted order.
  double operator()(const std::vector<int>& signs, const std::vector<double>& scales) const {
    const int dim = v_.dim();
    const double k = dim * (dim - 2.0);
    const std::size_t n = r2_.size();
    for (std::size_t i = 0; i < n; ++i) work_[i] = v_[i];
    for (std::size_t j = 0; j < scales.size(); ++j) {
      const double lam = scales[j];
      const double amp = signs[j] * bubble_power(dim, lam);
      const double inv = 1.0 / (lam * lam * k);
      for (std::size_t i = 0; i < n; ++i) work_[i] -= amp * bubble_power(dim, 1.0 + r2_[i] * inv);
    }
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double jmp = (i + 1 < n ? work_[i + 1] : 0.0) - work_[i];
      s += gw_[i] * jmp * jmp + hw_[i] * work_[i] * work_[i];
    }
    std::vector<double> sorted = scales;
    std::sort(sorted.begin(), sorted.end());
    return s + ratio_penalty(dim, sorted, lower_, upper_);
  }

  double operator()(const BubbleConfig& c) const { return (*this)(c.signs, c.scales); }

private:
  RadialField v_;
  double r_lo_, r_hi_, lower_, upper_;
  std::vector<double> gw_, hw_, r2_;
  mutable std::vector<double> work_;
};

struct ProximityReport {
  double value = 0.0;  ///< square root of the objective at `config`
  BubbleConfig config;
  double r_lo = 0.0, r_hi = infinity;
  double lower_scale = 0.0;      ///< lambda_0 (or lambda_K := rho)
  double upper_scale = infinity; ///< lambda_{M+1} (R, sqrt(t), or infinity)
  std::size_t evaluations = 0;

  double ratio_sum(int dim) const { return ratio_penalty(dim, config.scales, lower_scale, upper_scale); }
};

struct SearchOptions {
  std::vector<BubbleConfig> warm_starts; ///< tried with their own scales, under every sign vector
  int max_sweeps = 40;
  int brent_bits = 40;
  double log_bracket = 2.5;  ///< half-width of each Brent bracket in log(lambda)
  int keep_after_screen = 3; ///< candidates refined after the one-sweep screening pass
  double lambda_min = 0.0, lambda_max = infinity;
};

/// Scales suggested by the local maxima of r^{D/2} |d_r v|; W_lambda peaks at r = sqrt(D(D+2)) lambda.
inline std::vector<double> detect_scales(const RadialField& v, double r_lo = 0.0, double r_hi = infinity,
                                         double rel_floor = 1e-3) {
  const auto& g = v.grid();
  const std::size_t n = g.size();
  if (n < 3) return {};
  const auto nd = g.nodes();
  const int dim = g.dim();
  std::vector<double> mid(n - 1), val(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    mid[i] = 0.5 * (nd[i] + nd[i + 1]);
    val[i] = std::pow(mid[i], 0.5 * dim) * std::abs(v[i + 1] - v[i]) / (nd[i + 1] - nd[i]);
  }
  const double hi = std::min(r_hi, g.r_max());
  double top = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (mid[i] >= r_lo && mid[i] <= hi) top = std::max(top, val[i]);
  if (top <= 0.0) return {};
  std::vector<std::pair<double, double>> peaks;
  for (std::size_t i = 1; i + 2 < n; ++i) {
    if (mid[i] < r_lo || mid[i] > hi) continue;
    if (val[i] >= val[i - 1] && val[i] > val[i + 1] && val[i] >= rel_floor * top)
      peaks.emplace_back(val[i], mid[i] / std::sqrt(dim * (dim + 2.0)));
  }
  std::sort(peaks.begin(), peaks.end(), [](auto& a, auto& b) { return a.first > b.first; });
  std::vector<double> out;
  for (auto& p : peaks) out.push_back(p.second);
  return out;
}

namespace detail {

inline std::vector<std::vector<int>> all_signs(std::size_t m) {
  std::vector<std::vector<int>> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
    std::vector<int> s(m);
    for (std::size_t j = 0; j < m; ++j) s[j] = (mask >> j) & 1u ? -1 : 1;
    out.push_back(s);
  }
  return out;
}

/// Start scale vectors: M-subsets of the detected scales (strongest first), padded geometrically.
inline std::vector<std::vector<double>> start_scales(std::vector<double> detected, std::size_t m, double fallback) {
  std::vector<std::vector<double>> out;
  if (m == 0) return {{}};
  if (detected.empty()) detected.push_back(fallback);
  if (detected.size() > m + 2) detected.resize(m + 2);
  while (detected.size() < m) {
    const auto [lo, hi] = std::minmax_element(detected.begin(), detected.end());
    const double a = *lo, b = *hi;
    detected.push_back(detected.size() % 2 ? a / 30.0 : b * 30.0);
  }
  const std::size_t k = detected.size();
  std::vector<bool> pick(k, false);
  std::fill(pick.begin(), pick.begin() + static_cast<long>(m), true);
  do {
    std::vector<double> s;
    for (std::size_t i = 0; i < k; ++i)
      if (pick[i]) s.push_back(detected[i]);
    std::sort(s.begin(), s.end());
    out.push_back(s);
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return out;
}

} // namespace detail

/// Coordinate descent in log(lambda) from one start; returns (objective, scales).
inline std::pair<double, std::vector<double>> descend(const ProximityObjective& obj, const std::vector<int>& signs,
                                                      std::vector<double> scales, const SearchOptions& opt,
                                                      int sweeps, std::size_t& evals) {
  const double xmin = opt.lambda_min > 0 ? std::log(opt.lambda_min) : -std::numeric_limits<double>::infinity();
  const double xmax = std::isfinite(opt.lambda_max) ? std::log(opt.lambda_max) : std::numeric_limits<double>::infinity();
  double best = obj(signs, scales);
  ++evals;
  for (int sw = 0; sw < sweeps; ++sw) {
    const double before = best;
    for (std::size_t j = 0; j < scales.size(); ++j) {
      const double x0 = std::log(scales[j]);
      auto f = [&](double x) {
        auto s = scales;
        s[j] = std::exp(x);
        ++evals;
        return obj(signs, s);
      };
      const double a = std::max(x0 - opt.log_bracket, xmin), b = std::min(x0 + opt.log_bracket, xmax);
      std::uintmax_t iters = 200;
      const auto [x, fx] = boost::math::tools::brent_find_minima(f, a, b, opt.brent_bits, iters);
      if (fx < best) {
        best = fx;
        scales[j] = std::exp(x);
      }
    }
    if (before - best <= 1e-14 * std::max(best, 1e-300)) break;
  }
  return {best, scales};
}

/// Exhaustive signs x multi-start descent for a fixed number of bubbles.
inline ProximityReport minimize_proximity(const ProximityObjective& obj, std::size_t m, const SearchOptions& opt = {}) {
  ProximityReport rep;
  rep.r_lo = obj.r_lo();
  rep.r_hi = obj.r_hi();
  rep.lower_scale = obj.lower();
  rep.upper_scale = obj.upper();
  if (m == 0) {
    rep.value = std::sqrt(obj(std::vector<int>{}, std::vector<double>{}));
    rep.evaluations = 1;
    return rep;
  }
  const double fallback = std::isfinite(obj.upper()) ? std::sqrt(std::max(obj.lower(), 1e-300) * obj.upper())
                                                     : std::max(1.0, obj.lower() * 10.0);
  auto starts = detail::start_scales(detect_scales(obj.field(), obj.r_lo(), obj.r_hi()), m, fallback);
  for (const auto& w : opt.warm_starts)
    if (w.size() == m) starts.push_back(w.scales);

  struct Candidate {
    double value;
    std::vector<int> signs;
    std::vector<double> scales;
  };
  std::vector<Candidate> screened;
  std::size_t evals = 0;
  for (const auto& signs : detail::all_signs(m))
    for (const auto& s : starts) {
      auto [val, sc] = descend(obj, signs, s, opt, 1, evals);
      screened.push_back({val, signs, sc});
    }
  std::stable_sort(screened.begin(), screened.end(), [](auto& a, auto& b) { return a.value < b.value; });
  if (screened.size() > static_cast<std::size_t>(opt.keep_after_screen))
    screened.resize(static_cast<std::size_t>(opt.keep_after_screen));
  Candidate best{std::numeric_limits<double>::infinity(), {}, {}};
  for (auto& c : screened) {
    auto [val, sc] = descend(obj, c.signs, c.scales, opt, opt.max_sweeps, evals);
    if (val < best.value) best = {val, c.signs, sc};
  }
  rep.config = BubbleConfig{best.signs, best.scales}.sorted();
  // coincident scales are legal for the objective but not for a configuration
  for (std::size_t j = 1; j < m; ++j)
    rep.config.scales[j] = std::max(rep.config.scales[j], rep.config.scales[j - 1] * (1.0 + 1e-9));
  rep.value = std::sqrt(obj(rep.config));
  rep.evaluations = evals + 1;
  return rep;
}

/// d_M(v): infimum over M-bubble configurations of ||v - W||_E^2 + sum_{j<M} ratio terms.
inline ProximityReport proximity_dM(const RadialField& v, std::size_t m, const SearchOptions& opt = {}) {
  ProximityObjective obj(v, 0.0, infinity, 0.0, infinity);
  return minimize_proximity(obj, m, opt);
}

/// delta_R(v): norm on (0, R), last scale lambda_{M+1} = R, infimum also over M.
/// M grows from 0 until the value stops decreasing; ties within 1% go to the smaller M.
inline ProximityReport proximity_deltaR(const RadialField& v, double R, std::size_t m_cap = 4, const SearchOptions& opt = {}) {
  require_domain(R > 0.0, "delta_R needs R > 0");
  ProximityObjective obj(v, 0.0, R, 0.0, R);
  std::vector<ProximityReport> reps;
  for (std::size_t m = 0; m <= m_cap; ++m) {
    reps.push_back(minimize_proximity(obj, m, opt));
    if (m > 0 && reps[m].value >= reps[m - 1].value) break;
  }
  double best = infinity;
  for (auto& r : reps) best = std::min(best, r.value);
  for (auto& r : reps)
    if (r.value <= 1.01 * best) return r;
  return reps.back();
}

/// d_K(v; rho): free bubbles K+1..N on the exterior (rho, infinity) of v - u_star,
/// with lambda_K := rho and lambda_{N+1} := sqrt(t).
inline ProximityReport proximity_dK(const RadialField& v, const RadialField& u_star, double rho, std::size_t n,
                                    std::size_t k, double t, const SearchOptions& opt = {}) {
  require_domain(k <= n, "d_K needs K <= N");
  require_domain(rho >= 0.0 && t > 0.0, "d_K needs rho >= 0 and t > 0");
  ProximityObjective obj(v - u_star, rho, infinity, rho, std::sqrt(t));
  return minimize_proximity(obj, n - k, opt);
}

} // namespace bubbleflow
