#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bubbleflow/core/functionals.hpp"

namespace bubbleflow {

struct SolverConfig {
  double t_end = 1.0;
  double dt_init = 1e-4;
  double dt_min = 1e-13;
  double dt_max = 0.05;
  double tolerance = 1e-6;        ///< step-doubling error, sup norm relative to max(1, |u|_inf)
  double blowup_threshold = 1e3;  ///< |u|_inf above this flags blow-up
  double snapshot_every = 0.1;    ///< cadence of stored fields (in t)
  double stability_factor = 0.2;  ///< dt <= factor / max f'(u)
  bool adaptive = true;           ///< false: constant dt_init (still clipped to snapshot times)
  bool keep_every_step = false;   ///< store the field after every accepted step

  void validate() const {
    if (!(t_end > 0.0)) throw ConfigError("t_end must be positive");
    if (!(dt_min > 0.0 && dt_min < dt_init && dt_init <= dt_max))
      throw ConfigError("time steps must satisfy 0 < dt_min < dt_init <= dt_max");
    if (!(tolerance > 0.0 && blowup_threshold > 0.0 && snapshot_every > 0.0 && stability_factor > 0.0))
      throw ConfigError("tolerances and thresholds must be positive");
  }
};

enum class Termination { completed, blowup_linf, blowup_dt, nonfinite };

inline std::string to_string(Termination t) {
  switch (t) {
  case Termination::completed: return "completed";
  case Termination::blowup_linf: return "blowup_linf";
  case Termination::blowup_dt: return "blowup_dt";
  case Termination::nonfinite: return "nonfinite";
  }
  return "unknown";
}

struct EvolutionRecord {
  double t = 0.0;
  double dt = 0.0;  ///< step that produced this state (0 for the initial record)
  double energy = 0.0;
  double enorm = 0.0;
  double linf = 0.0;
  double tension_l2_sq = 0.0;
  double dissipation_cum = 0.0;  ///< sum over substeps of dt |(u+ - u)/dt|^2_{L^2}
  bool blowup = false;
};

struct Snapshot {
  double t = 0.0;
  RadialField u;
};

/// Type I ansatz |u|_inf ~ C (T - t)^{-1/(p-1)}: y = |u|_inf^{-(p-1)} is affine in t near T.
struct BlowupEstimate {
  double t_plus = 0.0;        ///< two-point extrapolation of y to 0 from the last records
  double t_plus_fit = 0.0;    ///< root of the least-squares line through the fit window
  double slope = 0.0;         ///< dy/dt of the fitted line (negative for blow-up)
  double fit_residual = 0.0;  ///< |y - line|_2 / |y|_2 over the window
  std::size_t points = 0;
};

struct Trajectory {
  SolverConfig config;
  std::vector<EvolutionRecord> records;
  std::vector<Snapshot> snapshots;
  std::vector<Snapshot> steps;  ///< every accepted state, only with keep_every_step
  Termination termination = Termination::completed;
  std::optional<BlowupEstimate> blowup;
  std::size_t rejected_steps = 0;

  bool blew_up() const { return termination != Termination::completed; }
  double final_time() const { return records.empty() ? 0.0 : records.back().t; }
  int dim() const { return snapshots.empty() ? 0 : snapshots.front().u.dim(); }
};

/// One IMEX step: (I - dt Delta_h) u+ = u + dt f(u), solved with the Thomas algorithm
/// on the symmetric form (V + dt A) u+ = V (u + dt f(u)).
inline RadialField step(const RadialField& u, double dt) {
  require_domain(dt > 0.0, "step needs dt > 0");
  const auto& g = u.grid();
  const std::size_t n = g.size();
  const auto c = g.coupling();
  const auto v = g.volumes();
  const int dim = g.dim();
  std::vector<double> diag(n), rhs(n), cp(n);
  for (std::size_t i = 0; i < n; ++i) {
    diag[i] = v[i] + dt * (c[i] + (i > 0 ? c[i - 1] : 0.0));
    rhs[i] = v[i] * (u[i] + dt * nonlinearity(dim, u[i]));
  }
  // off-diagonal entries are -dt c_i; the matrix is strictly diagonally dominant
  double denom = diag[0];
  cp[0] = -dt * c[0] / denom;
  rhs[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    const double lo = -dt * c[i - 1];
    denom = diag[i] - lo * cp[i - 1];
    if (!(denom > 0.0)) throw NumericalError("tridiagonal solve failed");
    cp[i] = i + 1 < n ? -dt * c[i] / denom : 0.0;
    rhs[i] = (rhs[i] - lo * rhs[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= cp[i] * rhs[i + 1];
  return RadialField(u.grid_ptr(), std::move(rhs));
}

namespace detail {

inline double max_fprime(const RadialField& u) {
  double m = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) m = std::max(m, nonlinearity_derivative(u.dim(), u[i]));
  return m;
}

inline double l2_diff_sq(const RadialField& a, const RadialField& b) {
  const auto v = a.grid().volumes();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += v[i] * (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

inline EvolutionRecord make_record(const RadialField& u, double t, double dt, double dissipation) {
  EvolutionRecord r;
  r.t = t;
  r.dt = dt;
  r.energy = energy(u);
  r.enorm = enorm(u);
  r.linf = u.linf();
  r.tension_l2_sq = l2_norm_sq(tension(u));
  r.dissipation_cum = dissipation;
  return r;
}

inline BlowupEstimate fit_type_one(const std::vector<EvolutionRecord>& recs, int dim, double threshold) {
  BlowupEstimate est;
  const double e = critical_power(dim) - 1.0;
  std::vector<double> ts, ys;
  for (const auto& r : recs)
    if (r.linf > 0.0 && std::isfinite(r.linf)) {
      ts.push_back(r.t);
      ys.push_back(std::pow(r.linf, -e));
    }
  if (ts.size() < 2) return est;
  const std::size_t k = ts.size();
  const double dy = ys[k - 1] - ys[k - 2], dtt = ts[k - 1] - ts[k - 2];
  est.t_plus = dy < 0.0 ? ts[k - 1] - ys[k - 1] * dtt / dy : ts[k - 1];
  // window: the records with |u|_inf above the geometric mean of the start value and the threshold
  const double cut = std::sqrt(std::max(recs.front().linf, 1e-300) * threshold);
  std::size_t first = k;
  while (first > 0 && std::pow(ys[first - 1], -1.0 / e) >= cut) --first;
  if (k - first < 4) first = k >= 8 ? k - 8 : 0;
  double st = 0, sy = 0, stt = 0, sty = 0;
  const double m = static_cast<double>(k - first);
  for (std::size_t i = first; i < k; ++i) {
    st += ts[i];
    sy += ys[i];
    stt += ts[i] * ts[i];
    sty += ts[i] * ys[i];
  }
  const double den = m * stt - st * st;
  est.points = k - first;
  if (den <= 0.0) return est;
  est.slope = (m * sty - st * sy) / den;
  const double icpt = (sy - est.slope * st) / m;
  est.t_plus_fit = est.slope < 0.0 ? -icpt / est.slope : ts[k - 1];
  double res = 0.0, nrm = 0.0;
  for (std::size_t i = first; i < k; ++i) {
    const double d = ys[i] - (icpt + est.slope * ts[i]);
    res += d * d;
    nrm += ys[i] * ys[i];
  }
  est.fit_residual = nrm > 0.0 ? std::sqrt(res / nrm) : 0.0;
  return est;
}

} // namespace detail

/// Adaptive IMEX integration with step doubling. A step of size dt is compared with two
/// steps of dt/2; the finer result is kept. Records every accepted step, fields at cadence.
inline Trajectory evolve(const RadialField& initial, const SolverConfig& cfg) {
  cfg.validate();
  require_domain(initial.finite(), "initial data must be finite");
  Trajectory tr;
  tr.config = cfg;
  RadialField u = initial;
  double t = 0.0, dt = cfg.dt_init, dissipation = 0.0;
  tr.records.push_back(detail::make_record(u, 0.0, 0.0, 0.0));
  tr.snapshots.push_back({0.0, u});
  if (cfg.keep_every_step) tr.steps.push_back({0.0, u});
  double next_snap = cfg.snapshot_every;
  const double eps_t = 1e-12 * cfg.t_end;

  while (t < cfg.t_end - eps_t) {
    const double guard = cfg.stability_factor / std::max(detail::max_fprime(u), 1e-300);
    double h = cfg.adaptive ? std::min({dt, cfg.dt_max, guard}) : cfg.dt_init;
    const double stop = std::min(next_snap, cfg.t_end);
    bool clipped = false;
    if (t + h >= stop - eps_t) {
      h = stop - t;
      clipped = true;
    }
    if (cfg.adaptive && h < cfg.dt_min && !clipped) {
      tr.termination = Termination::blowup_dt;
      break;
    }
    RadialField half = step(u, 0.5 * h);
    RadialField fine = step(half, 0.5 * h);
    if (cfg.adaptive) {
      const RadialField coarse = step(u, h);
      double err = 0.0;
      for (std::size_t i = 0; i < u.size(); ++i) err = std::max(err, std::abs(fine[i] - coarse[i]));
      err /= std::max(1.0, fine.linf());
      if (!std::isfinite(err)) err = infinity;
      const double factor = err > 0.0 ? std::clamp(0.9 * std::sqrt(cfg.tolerance / err), 0.2, 2.0) : 2.0;
      if (err > cfg.tolerance) {
        ++tr.rejected_steps;
        dt = h * factor;
        if (dt < cfg.dt_min) {
          tr.termination = Termination::blowup_dt;
          break;
        }
        continue;
      }
      if (!clipped || h >= dt) dt = h * factor;
    }
    const double hh = 0.5 * h;
    dissipation += (detail::l2_diff_sq(half, u) + detail::l2_diff_sq(fine, half)) / hh;
    u = std::move(fine);
    t = clipped ? stop : t + h;
    if (!u.finite()) {
      tr.termination = Termination::nonfinite;
      u.mark_blown_up();
      tr.records.push_back(detail::make_record(u, t, h, dissipation));
      tr.records.back().blowup = true;
      break;
    }
    tr.records.push_back(detail::make_record(u, t, h, dissipation));
    if (cfg.keep_every_step) tr.steps.push_back({t, u});
    if (clipped && std::abs(t - next_snap) <= eps_t) {
      tr.snapshots.push_back({t, u});
      next_snap += cfg.snapshot_every;
    }
    if (tr.records.back().linf > cfg.blowup_threshold) {
      tr.termination = Termination::blowup_linf;
      tr.records.back().blowup = true;
      break;
    }
  }
  if (tr.termination == Termination::blowup_dt) tr.records.back().blowup = true;
  if (tr.snapshots.back().t < t) tr.snapshots.push_back({t, u});
  if (tr.blew_up()) tr.blowup = detail::fit_type_one(tr.records, initial.dim(), cfg.blowup_threshold);
  return tr;
}

namespace detail {

inline std::size_t nearest_record(const Trajectory& tr, double t) {
  require_domain(!tr.records.empty(), "empty trajectory");
  std::size_t best = 0;
  for (std::size_t i = 1; i < tr.records.size(); ++i)
    if (std::abs(tr.records[i].t - t) < std::abs(tr.records[best].t - t)) best = i;
  return best;
}

} // namespace detail

/// E(u(t2)) + int_{t1}^{t2} |d_t u|^2 - E(u(t1)), with t1, t2 snapped to the nearest records.
inline double dissipation_ledger(const Trajectory& tr, double t1, double t2) {
  require_domain(t1 <= t2, "ledger needs t1 <= t2");
  const auto& a = tr.records[detail::nearest_record(tr, t1)];
  const auto& b = tr.records[detail::nearest_record(tr, t2)];
  return b.energy + (b.dissipation_cum - a.dissipation_cum) - a.energy;
}

/// phi(t, r) with its partial derivatives.
struct Cutoff {
  std::function<double(double, double)> phi, phi_r, phi_t;

  static Cutoff constant() {
    return {[](double, double) { return 1.0; }, [](double, double) { return 0.0; }, [](double, double) { return 0.0; }};
  }
};

namespace detail {

/// C-infinity step: 0 for x <= 0, 1 for x >= 1.
inline double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / x), b = std::exp(-1.0 / (1.0 - x));
  return a / (a + b);
}

inline double smooth_step_derivative(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  const double a = std::exp(-1.0 / x), b = std::exp(-1.0 / (1.0 - x));
  const double da = a / (x * x), db = -b / ((1.0 - x) * (1.0 - x));
  return (da * (a + b) - a * (da + db)) / ((a + b) * (a + b));
}

} // namespace detail

/// chi(r) = 1 for r <= inner, 0 for r >= outer, smooth in between.
struct CutoffProfile {
  double inner = 1.0, outer = 4.0;

  double operator()(double r) const { return 1.0 - detail::smooth_step((r - inner) / (outer - inner)); }
  double derivative(double r) const {
    return -detail::smooth_step_derivative((r - inner) / (outer - inner)) / (outer - inner);
  }
};

/// Static annulus: 1 on [r1, r2], 0 outside (r1/2, 2 r2).
inline Cutoff annulus_cutoff(double r1, double r2) {
  require_domain(r1 > 0.0 && r2 > r1, "annulus needs 0 < r1 < r2");
  auto f = [=](double r) {
    return detail::smooth_step((r - 0.5 * r1) / (0.5 * r1)) * (1.0 - detail::smooth_step((r - r2) / r2));
  };
  auto fr = [=](double r) {
    const double a = detail::smooth_step((r - 0.5 * r1) / (0.5 * r1)), da = detail::smooth_step_derivative((r - 0.5 * r1) / (0.5 * r1)) / (0.5 * r1);
    const double b = 1.0 - detail::smooth_step((r - r2) / r2), db = -detail::smooth_step_derivative((r - r2) / r2) / r2;
    return da * b + a * db;
  };
  return {[=](double, double r) { return f(r); }, [=](double, double r) { return fr(r); },
          [](double, double) { return 0.0; }};
}

/// chi(r / (alpha sqrt(T - t))): the self-similar window shrinking towards the blow-up time T.
inline Cutoff shrinking_cutoff(CutoffProfile chi, double alpha, double T) {
  require_domain(alpha > 0.0, "shrinking cutoff needs alpha > 0");
  auto width = [=](double t) { return alpha * std::sqrt(std::max(T - t, 1e-300)); };
  return {[=](double t, double r) { return chi(r / width(t)); },
          [=](double t, double r) { return chi.derivative(r / width(t)) / width(t); },
          [=](double t, double r) {
            // d/dt (r / w) = r alpha^2 / (2 w^3)
            const double w = width(t);
            return chi.derivative(r / w) * r * alpha * alpha / (2.0 * w * w * w);
          }};
}

/// Both sides of the localized identity for int e~(u) phi^2, e~ = (d_r u)^2 + u^2/r^2, and the
/// right-hand sides of its two inequality forms. Needs a trajectory recorded with keep_every_step.
struct LocalizedBalance {
  double lhs = 0.0;          ///< int e~(u(t2)) phi^2 - int e~(u(t1)) phi^2
  double dissipation = 0.0;  ///< int int (d_t u)^2 phi^2
  double nonlinear = 0.0;    ///< int int f(u) d_t u phi^2
  double cross = 0.0;        ///< int int d_r u d_t u phi d_r phi
  double hardy = 0.0;        ///< int int u d_t u / r^2 phi^2
  double time = 0.0;         ///< int int e~(u) phi d_t phi
  double grad_cut = 0.0;     ///< int int (d_r u)^2 (d_r phi)^2
  double pot_2p = 0.0;       ///< int int |u|^{2p} phi^2
  double hardy_4 = 0.0;      ///< int int u^2 / r^4 phi^2
  double dt_cut = 0.0;       ///< int int (d_t u)^2 phi^2 (d_r phi)^2
  double grad_all = 0.0;     ///< int int (d_r u)^2

  double identity_rhs() const { return -2 * dissipation + 2 * nonlinear - 4 * cross + 2 * hardy + 2 * time; }
  double identity_residual() const { return lhs - identity_rhs(); }
  double inequality_one_rhs() const {
    return -dissipation + 4 * grad_cut + 2 * std::sqrt(pot_2p * dissipation) + 2 * std::sqrt(hardy_4 * dissipation);
  }
  double inequality_two_rhs() const {
    return -2 * dissipation + 2 * std::sqrt(pot_2p * dissipation) + 4 * std::sqrt(dt_cut * grad_all) +
           2 * std::sqrt(hardy_4 * dissipation);
  }
};

namespace detail {

inline double weighted_hardy_density(const RadialField& u, const Cutoff& c, double t) {
  const auto& g = u.grid();
  const auto cp = g.coupling();
  const auto hw = g.hardy_weights();
  const auto f = g.faces();
  const auto r = g.nodes();
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double j = jump(u.values(), i);
    const double pf = c.phi(t, f[i + 1]), pn = c.phi(t, r[i]);
    s += cp[i] * j * j * pf * pf + hw[i] * u[i] * u[i] * pn * pn;
  }
  return s;
}

} // namespace detail

inline LocalizedBalance localized_energy_balance(const Trajectory& tr, const Cutoff& phi, double t1, double t2) {
  require_domain(t1 <= t2, "balance needs t1 <= t2");
  require_domain(tr.steps.size() >= 1, "localized balance needs a trajectory with keep_every_step");
  auto nearest = [&](double t) {
    std::size_t b = 0;
    for (std::size_t i = 1; i < tr.steps.size(); ++i)
      if (std::abs(tr.steps[i].t - t) < std::abs(tr.steps[b].t - t)) b = i;
    return b;
  };
  const std::size_t a = nearest(t1), b = nearest(t2);
  LocalizedBalance out;
  out.lhs = detail::weighted_hardy_density(tr.steps[b].u, phi, tr.steps[b].t) -
            detail::weighted_hardy_density(tr.steps[a].u, phi, tr.steps[a].t);
  if (a == b) return out;
  const auto& g = tr.steps[a].u.grid();
  const int dim = g.dim();
  const std::size_t n = g.size();
  const auto cp = g.coupling();
  const auto hw = g.hardy_weights();
  const auto vol = g.volumes();
  const auto f = g.faces();
  const auto r = g.nodes();
  const double two_p = 2.0 * critical_power(dim);
  std::vector<double> ubar(n), ut(n);
  for (std::size_t k = a; k < b; ++k) {
    const auto& u0 = tr.steps[k].u;
    const auto& u1 = tr.steps[k + 1].u;
    const double dt = tr.steps[k + 1].t - tr.steps[k].t;
    const double tm = tr.steps[k].t + 0.5 * dt;
    for (std::size_t i = 0; i < n; ++i) {
      ubar[i] = 0.5 * (u0[i] + u1[i]);
      ut[i] = (u1[i] - u0[i]) / dt;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double pn = phi.phi(tm, r[i]), pnr = phi.phi_r(tm, r[i]), pnt = phi.phi_t(tm, r[i]);
      const double pf = phi.phi(tm, f[i + 1]), pfr = phi.phi_r(tm, f[i + 1]), pft = phi.phi_t(tm, f[i + 1]);
      const double j = detail::jump(ubar, i);
      const double utf = 0.5 * (ut[i] + (i + 1 < n ? ut[i + 1] : 0.0));
      const double h = g.spacing(i);
      out.dissipation += dt * vol[i] * ut[i] * ut[i] * pn * pn;
      out.nonlinear += dt * vol[i] * nonlinearity(dim, u0[i]) * ut[i] * pn * pn;
      out.cross += dt * cp[i] * j * utf * h * pf * pfr;
      out.hardy += dt * hw[i] * ubar[i] * ut[i] * pn * pn;
      out.time += dt * (cp[i] * j * j * pf * pft + hw[i] * ubar[i] * ubar[i] * pn * pnt);
      out.grad_cut += dt * cp[i] * j * j * pfr * pfr;
      out.pot_2p += dt * vol[i] * std::pow(std::abs(ubar[i]), two_p) * pn * pn;
      out.hardy_4 += dt * vol[i] * ubar[i] * ubar[i] / (r[i] * r[i] * r[i] * r[i]) * pn * pn;
      out.dt_cut += dt * vol[i] * ut[i] * ut[i] * pn * pn * pnr * pnr;
      out.grad_all += dt * cp[i] * j * j;
    }
  }
  return out;
}

} // namespace bubbleflow
