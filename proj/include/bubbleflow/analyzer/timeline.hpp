#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "bubbleflow/evolution/solver.hpp"
#include "bubbleflow/modulation/fit.hpp"
#include "bubbleflow/spectral/zprofile.hpp"

namespace bubbleflow {

enum class Outcome { dissipation, soliton_resolution_global, type_I_blowup, type_II_candidate, undecided };

inline std::string to_string(Outcome o) {
  switch (o) {
  case Outcome::dissipation: return "dissipation";
  case Outcome::soliton_resolution_global: return "soliton_resolution_global";
  case Outcome::type_I_blowup: return "type_I_blowup";
  case Outcome::type_II_candidate: return "type_II_candidate";
  case Outcome::undecided: return "undecided";
  }
  return "undecided";
}

struct AnalyzerOptions {
  std::size_t n_max = 3;
  double hysteresis = 0.01;   ///< keep the previous N while its d is within this fraction of the best
  double alpha = 1.0;         ///< inner window E(u; 0, alpha sqrt(tau))
  double A = 4.0;             ///< annulus (alpha sqrt(tau), A sqrt(tau))
  double u_star_tol = 1e-4;   ///< E-norm change defining the u* extraction radius
  double rate_residual = 0.1; ///< Type I fit residual accepted as a good fit
  double small_d = 0.1;       ///< d below this counts as close to a multi-bubble
  double dissipated = 0.5;    ///< final ||u||_E below this fraction of the initial one
  unsigned jobs = 1;
  SearchOptions search;
};

struct TimelineRow {
  double t = 0.0;
  double tau = 0.0;  ///< t (global) or T+ - t (blow-up)
  double d = 0.0;
  std::size_t n_fit = 0;
  BubbleConfig config;  ///< minimizer of d(t)
  BubbleConfig fitted;  ///< modulation fit started from `config`
  std::vector<double> a_minus;
  double ratio_sum = 0.0;
  double e_inner = 0.0, e_annulus = 0.0, e_outer = 0.0;
  double energy = 0.0;
  double enorm = 0.0;
  double g_enorm = 0.0;  ///< ||u - u* - W(fitted)||_E
  bool fit_converged = true;
  std::vector<double> d_by_m;  ///< d_M for M = 0..n_max
};

struct ResolutionTimeline {
  int dim = 0;
  std::size_t n_max = 3;
  bool blowup = false;
  double t_plus = 0.0;
  double rate_residual = 0.0;
  double u_star_radius = 0.0;
  RadialField u_star;
  std::vector<TimelineRow> rows;
  std::vector<RadialField> fields;  ///< u(t) per row
  Outcome outcome = Outcome::undecided;

  std::size_t unconverged() const {
    return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](auto& r) { return !r.fit_converged; }));
  }
};

namespace detail {

template <class F>
void parallel_for(std::size_t n, unsigned jobs, F&& body) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned j = 0; j < jobs; ++j)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  for (auto& th : pool) th.join();
}

/// E(u; 0, a), E(u; a, b), E(u; b, infinity); empty windows give 0.
inline void window_energies(const RadialField& u, double a, double b, double& inner, double& annulus, double& outer) {
  inner = a > 0.0 ? local_energy(u, 0.0, a) : 0.0;
  annulus = b > a ? local_energy(u, a, b) : 0.0;
  outer = b < u.grid().r_max() ? local_energy(u, b, infinity) : 0.0;
}

} // namespace detail

/// Smallest node radius outside which the last two snapshots differ by less than tol in E-norm;
/// u* is the last snapshot faded to zero over (r0, 2 r0).
inline RadialField extract_u_star(const RadialField& prev, const RadialField& last, double tol, double& radius) {
  const auto nd = last.grid().nodes();
  const RadialField diff = last - prev;
  std::size_t k = nd.size();
  // the tail norm is monotone in the lower limit, so scan inwards
  while (k > 0 && enorm(diff, nd[k - 1], infinity) < tol) --k;
  radius = k < nd.size() ? nd[k] : last.grid().r_max();
  const double r0 = radius;
  return RadialField::sample(last.grid_ptr(), [&](double r) { return detail::smooth_step(r / r0 - 1.0) * last.at(r); });
}

/// Decomposes each snapshot: d(t) = d_0(t; 0) with lambda_{N+1} = sqrt(tau), N chosen by minimal d
/// with hysteresis, then the modulation fit started from the minimizing configuration.
inline ResolutionTimeline analyze(const Trajectory& tr, const AnalyzerOptions& opt = {}) {
  require_domain(tr.snapshots.size() >= 2, "analyze needs at least two snapshots");
  ResolutionTimeline tl;
  tl.dim = tr.dim();
  tl.n_max = opt.n_max;
  tl.blowup = tr.blew_up();
  const auto grid = tr.snapshots.front().u.grid_ptr();
  if (tl.blowup && tr.blowup) {
    tl.t_plus = tr.blowup->t_plus;
    tl.rate_residual = tr.blowup->fit_residual;
    const auto& s = tr.snapshots;
    tl.u_star = extract_u_star(s[s.size() - 2].u, s.back().u, opt.u_star_tol, tl.u_star_radius);
  } else {
    tl.u_star = RadialField::zero(grid);
  }
  const auto eig = negative_eigenpair(tl.dim);
  const auto z = build_z_profile(tl.dim, eig).profile;

  const std::size_t ns = tr.snapshots.size();
  tl.rows.resize(ns);
  std::vector<std::vector<ProximityReport>> reports(ns);
  detail::parallel_for(ns, opt.jobs, [&](std::size_t i) {
    const auto& snap = tr.snapshots[i];
    auto& row = tl.rows[i];
    row.t = snap.t;
    row.tau = tl.blowup ? std::max(tl.t_plus - snap.t, 0.0) : snap.t;
    // tau = 0 has no anchor scale: the last ratio term is dropped
    for (std::size_t m = 0; m <= opt.n_max; ++m) {
      const ProximityReport rep = row.tau > 0.0 ? proximity_dK(snap.u, tl.u_star, 0.0, m, 0, row.tau, opt.search)
                                                : proximity_dM(snap.u - tl.u_star, m, opt.search);
      reports[i].push_back(rep);
      row.d_by_m.push_back(rep.value);
    }
    row.energy = energy(snap.u);
    row.enorm = enorm(snap.u);
    const double s = std::sqrt(row.tau);
    detail::window_energies(snap.u, opt.alpha * s, opt.A * s, row.e_inner, row.e_annulus, row.e_outer);
  });

  std::size_t prev = 0;
  for (std::size_t i = 0; i < ns; ++i) {
    auto& row = tl.rows[i];
    const double best = *std::min_element(row.d_by_m.begin(), row.d_by_m.end());
    const double cut = (1.0 + opt.hysteresis) * best;
    std::size_t pick = 0;
    while (row.d_by_m[pick] > cut) ++pick;
    if (i > 0 && row.d_by_m[prev] <= cut) pick = prev;
    prev = pick;
    const auto& rep = reports[i][pick];
    row.n_fit = pick;
    row.d = rep.value;
    row.config = rep.config;
    row.ratio_sum = rep.ratio_sum(tl.dim);
    row.fitted = rep.config;
  }

  detail::parallel_for(ns, opt.jobs, [&](std::size_t i) {
    auto& row = tl.rows[i];
    const RadialField v = tr.snapshots[i].u - tl.u_star;
    if (row.n_fit == 0) {
      row.g_enorm = enorm(v);
      return;
    }
    const auto st = fit_modulation(v, row.config, eig, z);
    row.fit_converged = st.converged;
    row.a_minus = st.converged ? st.a_minus : unstable_components(v - multi_bubble(row.config, v.grid_ptr()), row.config, eig);
    if (st.converged) row.fitted = st.config;
    row.g_enorm = enorm(v - multi_bubble(row.fitted, v.grid_ptr()));
  });
  for (const auto& s : tr.snapshots) tl.fields.push_back(s.u);
  return tl;
}

/// Outcome tag from the late part of the timeline.
inline Outcome classify(const ResolutionTimeline& tl, const AnalyzerOptions& opt = {}) {
  if (tl.rows.empty()) return Outcome::undecided;
  const auto& first = tl.rows.front();
  const auto& last = tl.rows.back();
  if (tl.blowup) {
    const bool grows = last.enorm > 1.5 * first.enorm;
    if (tl.rate_residual <= opt.rate_residual && grows) return Outcome::type_I_blowup;
    double dmax = 0.0;
    const std::size_t late = tl.rows.size() / 2;
    for (std::size_t i = late; i < tl.rows.size(); ++i) dmax = std::max(dmax, tl.rows[i].d);
    if (!grows && dmax <= opt.small_d) return Outcome::type_II_candidate;
    return Outcome::undecided;
  }
  if (last.n_fit == 0 && last.enorm <= opt.dissipated * first.enorm) return Outcome::dissipation;
  if (last.n_fit >= 1 && last.fit_converged && last.g_enorm <= opt.small_d &&
      interior_ratio_sum(tl.dim, last.fitted) <= opt.small_d)
    return Outcome::soliton_resolution_global;
  return Outcome::undecided;
}

struct CollisionInterval {
  double a = 0.0, b = 0.0;
  std::size_t first = 0, last = 0;  ///< row indices
  std::vector<double> times;
  std::vector<double> d;
  std::vector<double> rho;  ///< witness rho_K(t)
  std::vector<double> d_k;  ///< d_K(t; rho_K(t))
};

struct CollisionIntervalReport {
  std::size_t k = 0;
  std::size_t n = 0;
  double epsilon = 0.0, eta = 0.0;
  std::vector<CollisionInterval> intervals;
};

/// Candidate witnesses: geometric grid between the fitted lambda_K and lambda_{K+1}
/// (lambda_0 taken as 1e-4 lambda_1, lambda_{N+1} = sqrt(tau)).
inline std::vector<double> witness_grid(const TimelineRow& row, std::size_t k, std::size_t n, double r_min, int points = 16) {
  std::vector<double> s = row.config.scales;
  const double top = row.tau > 0.0 ? std::sqrt(row.tau) : (s.empty() ? 1.0 : 100.0 * s.back());
  double lo, hi;
  if (s.empty()) {
    lo = r_min;
    hi = top;
  } else {
    const std::size_t kk = std::min(k, s.size());
    lo = kk == 0 ? 1e-4 * s.front() : s[kk - 1];
    hi = kk < s.size() && kk < n ? s[kk] : top;
  }
  lo = std::max(lo, r_min);
  if (hi <= lo) hi = 10.0 * lo;
  std::vector<double> out;
  for (int i = 0; i < points; ++i) out.push_back(lo * std::pow(hi / lo, i / (points - 1.0)));
  return out;
}

/// Scans d(t) for [a, b] with d(a) <= eps, d(b) >= eta and min_rho d_K(t; rho) <= eps on every
/// row in between. Each interval starts at the latest admissible a before its b.
inline CollisionIntervalReport detect_collisions(const ResolutionTimeline& tl, double eps, double eta, std::size_t k,
                                                 const SearchOptions& search = {}) {
  require_domain(eps > 0.0 && eps < eta, "collision detection needs 0 < eps < eta");
  CollisionIntervalReport rep;
  rep.k = k;
  rep.epsilon = eps;
  rep.eta = eta;
  for (const auto& r : tl.rows) rep.n = std::max(rep.n, r.n_fit);
  require_domain(k <= rep.n, "collision detection needs K <= N");
  require_domain(tl.fields.size() == tl.rows.size(), "timeline carries no fields");
  const std::size_t ns = tl.rows.size();
  std::vector<double> rho(ns), dk(ns);
  for (std::size_t i = 0; i < ns; ++i) {
    const auto& row = tl.rows[i];
    const double r_min = tl.fields[i].grid().nodes()[0];
    dk[i] = infinity;
    const double tt = row.tau > 0.0 ? row.tau : infinity;
    for (double p : witness_grid(row, k, rep.n, r_min)) {
      const double v = proximity_dK(tl.fields[i], tl.u_star, p, rep.n, k, tt, search).value;
      if (v < dk[i]) {
        dk[i] = v;
        rho[i] = p;
      }
    }
  }
  std::optional<std::size_t> start;
  for (std::size_t i = 0; i < ns; ++i) {
    const bool witness = dk[i] <= eps;
    if (!witness) {
      start.reset();
      continue;
    }
    if (tl.rows[i].d <= eps) {
      start = i;
      continue;
    }
    if (start && tl.rows[i].d >= eta) {
      CollisionInterval ci;
      ci.first = *start;
      ci.last = i;
      ci.a = tl.rows[*start].t;
      ci.b = tl.rows[i].t;
      for (std::size_t j = *start; j <= i; ++j) {
        ci.times.push_back(tl.rows[j].t);
        ci.d.push_back(tl.rows[j].d);
        ci.rho.push_back(rho[j]);
        ci.d_k.push_back(dk[j]);
      }
      rep.intervals.push_back(std::move(ci));
      start.reset();
    }
  }
  return rep;
}

struct WindowedEnergyRow {
  double t = 0.0, tau = 0.0, alpha = 0.0;
  double inner = 0.0, annulus = 0.0, outer = 0.0;
};

/// E(u; 0, alpha sqrt(tau)), E(u; alpha sqrt(tau), A sqrt(tau)), E(u; A sqrt(tau), infinity) per
/// snapshot and alpha; tau = t, or T+ - t when t_plus is given.
inline std::vector<WindowedEnergyRow> windowed_energy_scan(const Trajectory& tr, const std::vector<double>& alphas,
                                                           double A, std::optional<double> t_plus = std::nullopt) {
  for (double a : alphas) require_domain(a > 0.0 && a < A, "windows need 0 < alpha < A");
  if (tr.blew_up() && !t_plus) {
    require_domain(tr.blowup.has_value(), "blow-up run without a T+ estimate");
    t_plus = tr.blowup->t_plus;
  }
  std::vector<WindowedEnergyRow> out;
  for (const auto& s : tr.snapshots) {
    const double tau = t_plus ? std::max(*t_plus - s.t, 0.0) : s.t;
    for (double a : alphas) {
      WindowedEnergyRow row;
      row.t = s.t;
      row.tau = tau;
      row.alpha = a;
      detail::window_energies(s.u, a * std::sqrt(tau), A * std::sqrt(tau), row.inner, row.annulus, row.outer);
      out.push_back(row);
    }
  }
  return out;
}

} // namespace bubbleflow
