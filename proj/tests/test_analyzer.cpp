#include <catch_amalgamated.hpp>

#include <cmath>

#include "bubbleflow/analyzer/timeline.hpp"
#include "oracles.hpp"

using namespace bubbleflow;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

GridPtr default_grid(int dim = 5) { return make_grid(GridSpec{dim}); }

GridPtr sweep_grid() { return make_geometric_grid(5, 1024, 1e3, 1.01); }

Trajectory run(const RadialField& u0, double t_end, double every) {
  SolverConfig cfg;
  cfg.t_end = t_end;
  cfg.snapshot_every = every;
  return evolve(u0, cfg);
}

/// A hand-made trajectory holding the given frames.
Trajectory frames(const std::vector<double>& ts, const std::vector<RadialField>& us) {
  Trajectory tr;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    tr.snapshots.push_back({ts[i], us[i]});
    tr.records.push_back(detail::make_record(us[i], ts[i], 0.0, 0.0));
  }
  return tr;
}

Trajectory thinned(const Trajectory& tr) {
  Trajectory out = tr;
  out.snapshots.clear();
  for (std::size_t i = 0; i < tr.snapshots.size(); i += 2) out.snapshots.push_back(tr.snapshots[i]);
  if (out.snapshots.back().t != tr.snapshots.back().t) out.snapshots.push_back(tr.snapshots.back());
  return out;
}

} // namespace

TEST_CASE("a stationary bubble resolves to one bubble", "[analyzer]") {
  const auto w = bubble_field(default_grid());
  const auto tr = run(w, 1.0, 0.25);
  auto tl = analyze(tr);
  REQUIRE(tl.rows.size() == tr.snapshots.size());
  REQUIRE(tl.fields.size() == tl.rows.size());
  REQUIRE_FALSE(tl.blowup);
  for (const auto& row : tl.rows) {
    REQUIRE(row.n_fit == 1);
    REQUIRE(row.fit_converged);
    REQUIRE(row.fitted.signs == std::vector<int>{1});
    REQUIRE(row.g_enorm < 1e-3 * enorm(w));
    REQUIRE(row.d_by_m.size() == 4);
  }
  REQUIRE(classify(tl) == Outcome::soliton_resolution_global);
  REQUIRE(tl.unconverged() == 0);
}

TEST_CASE("small data resolves to no bubble", "[analyzer]") {
  const auto tr = run(0.1 * bubble_field(sweep_grid()), 10.0, 2.5);
  const auto tl = analyze(tr);
  REQUIRE(tl.rows.back().n_fit == 0);
  REQUIRE(classify(tl) == Outcome::dissipation);
  REQUIRE(classify(analyze(thinned(tr))) == Outcome::dissipation);
}

TEST_CASE("a small bump dissipates", "[analyzer]") {
  const auto g = sweep_grid();
  const auto bump = RadialField::sample(g, [](double r) { return 0.05 * std::exp(-r * r); });
  const auto tl = analyze(run(bump, 10.0, 2.5));
  REQUIRE(classify(tl) == Outcome::dissipation);
}

TEST_CASE("large data is classified as Type I blow-up", "[analyzer]") {
  const auto tr = run(1.5 * bubble_field(sweep_grid()), 3.0, 0.1);
  REQUIRE(tr.blew_up());
  const auto tl = analyze(tr);
  REQUIRE(tl.blowup);
  REQUIRE_THAT(tl.t_plus, WithinRel(tr.blowup->t_plus, 1e-15));
  REQUIRE(tl.u_star_radius > 0.0);
  REQUIRE(classify(tl) == Outcome::type_I_blowup);
  REQUIRE(classify(analyze(thinned(tr))) == Outcome::type_I_blowup);
}

TEST_CASE("synthetic frames recover their scales", "[analyzer]") {
  const auto g = default_grid();
  const std::vector<double> ts{0.0, 1e2, 1e4};
  const std::vector<double> eps{0.5, 1.0, 2.0};
  std::vector<RadialField> us;
  for (double e : eps) us.push_back(bubble_field(g, e));
  const auto tl = analyze(frames(ts, us));
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto& row = tl.rows[i];
    REQUIRE(row.n_fit == 1);
    REQUIRE(row.fit_converged);
    const double ratio = row.fitted.scales[0] / eps[i];
    REQUIRE(ratio >= 0.99);
    REQUIRE(ratio <= 1.01);
  }
}

TEST_CASE("timeline rows are internally consistent", "[analyzer]") {
  const auto tr = run(0.8 * bubble_field(sweep_grid()), 2.0, 0.5);
  const auto tl = analyze(tr);
  for (std::size_t i = 0; i < tl.rows.size(); ++i) {
    const auto& row = tl.rows[i];
    const auto& u = tl.fields[i];
    REQUIRE(row.d == row.d_by_m[row.n_fit]);
    REQUIRE(row.config.size() == row.n_fit);
    // d(t) is re-checkable from the stored configuration
    const double upper = row.tau > 0.0 ? std::sqrt(row.tau) : infinity;
    const ProximityObjective obj(u - tl.u_star, 0.0, infinity, 0.0, upper);
    REQUIRE_THAT(std::sqrt(obj(row.config)), WithinRel(row.d, 1e-12));
    REQUIRE_THAT(row.ratio_sum, WithinAbs(ratio_penalty(5, row.config.scales, 0.0, upper), 1e-15));
    // the three windows partition the energy
    REQUIRE_THAT(row.e_inner + row.e_annulus + row.e_outer, WithinAbs(row.energy, 1e-10 * (1.0 + std::abs(row.energy))));
    REQUIRE_THAT(row.energy, WithinRel(energy(u), 1e-14));
  }
  REQUIRE_THROWS_AS(analyze(frames({0.0}, {tl.fields[0]})), DomainError);
}

TEST_CASE("collision intervals on a synthetic timeline", "[analyzer]") {
  const auto g = default_grid();
  const BubbleConfig two{{1, 1}, {1e-4, 1.0}};
  const auto u = multi_bubble(two, g);
  ResolutionTimeline tl;
  tl.dim = 5;
  tl.u_star = RadialField::zero(g);
  const std::vector<double> ds{0.05, 0.08, 0.1, 0.3, 0.6, 0.7};
  for (std::size_t i = 0; i < ds.size(); ++i) {
    TimelineRow row;
    row.t = 0.5 * static_cast<double>(i);
    row.tau = 1e6;
    row.d = ds[i];
    row.n_fit = 2;
    row.config = two;
    tl.rows.push_back(row);
    tl.fields.push_back(u);
  }
  const auto rep = detect_collisions(tl, 0.1, 0.5, 1);
  REQUIRE(rep.n == 2);
  REQUIRE(rep.intervals.size() == 1);
  const auto& ci = rep.intervals[0];
  REQUIRE(ci.a == 1.0);
  REQUIRE(ci.b == 2.0);
  REQUIRE(ci.d.front() <= rep.epsilon);
  REQUIRE(ci.d.back() >= rep.eta);
  for (double x : ci.d_k) REQUIRE(x <= rep.epsilon);
  for (double r : ci.rho) {
    REQUIRE(r >= two.scales[0]);
    REQUIRE(r <= two.scales[1]);
  }

  // monotone decreasing d: no interval
  auto calm = tl;
  for (std::size_t i = 0; i < calm.rows.size(); ++i) calm.rows[i].d = 0.7 - 0.1 * static_cast<double>(i);
  REQUIRE(detect_collisions(calm, 0.1, 0.5, 1).intervals.empty());

  REQUIRE_THROWS_AS(detect_collisions(tl, 0.5, 0.5, 1), DomainError);
  REQUIRE_THROWS_AS(detect_collisions(tl, 0.1, 0.5, 3), DomainError);
  auto bare = tl;
  bare.fields.clear();
  REQUIRE_THROWS_AS(detect_collisions(bare, 0.1, 0.5, 1), DomainError);
}

TEST_CASE("windowed energies of a static bubble", "[analyzer]") {
  const auto w = bubble_field(default_grid());
  const double ew = energy(w);
  const auto rows = windowed_energy_scan(frames({1.0, 1e2, 1e4}, {w, w, w}), {1.0}, 4.0);
  REQUIRE(rows.size() == 3);
  std::vector<double> gap;
  for (const auto& r : rows) {
    REQUIRE_THAT(r.inner + r.annulus + r.outer, WithinAbs(ew, 1e-10));
    gap.push_back(std::abs(r.inner - ew));
    // what is missing is the exterior energy beyond sqrt(t)
    if (r.t >= 1e2) REQUIRE_THAT(ew - r.inner, WithinRel(oracle::energy(5, std::sqrt(r.t)), 0.05));
  }
  REQUIRE(gap[1] < gap[0]);
  REQUIRE(gap[2] < gap[1]);
  REQUIRE(gap[2] < 1e-3 * ew);
  REQUIRE_THROWS_AS(windowed_energy_scan(frames({1.0}, {w}), {4.0}, 4.0), DomainError);
}

TEST_CASE("windowed energies of a dissipating run", "[analyzer]") {
  const auto tr = run(0.1 * bubble_field(sweep_grid()), 10.0, 2.5);
  const auto rows = windowed_energy_scan(tr, {0.5, 1.0}, 4.0);
  auto total = [](const WindowedEnergyRow& r) { return std::abs(r.inner) + std::abs(r.annulus) + std::abs(r.outer); };
  REQUIRE(total(rows.back()) < 0.3 * total(rows.front()));
  // rows come in (alpha = 0.5, alpha = 1) pairs; the t = 0 pair has empty inner windows
  REQUIRE(rows[1].inner == 0.0);
  for (double x : {rows.back().inner, rows.back().annulus, rows.back().outer}) REQUIRE(std::abs(x) < 0.3 * total(rows.front()));
}

TEST_CASE("windowed energies of a concentrating bubble", "[analyzer]") {
  const auto g = default_grid();
  const double T = 1.0;
  std::vector<double> ts;
  std::vector<RadialField> us;
  for (double tau : {1e-1, 1e-2, 1e-3, 1e-4}) {
    ts.push_back(T - tau);
    us.push_back(bubble_field(g, 0.1 * tau));
  }
  auto tr = frames(ts, us);
  tr.termination = Termination::blowup_linf;
  const auto rows = windowed_energy_scan(tr, {1.0}, 4.0, T);
  std::vector<double> gap, ann;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    gap.push_back(std::abs(rows[i].inner - energy(us[i])));
    ann.push_back(std::abs(rows[i].annulus));
  }
  const double ew = energy(us.back());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    REQUIRE(gap[i] < gap[i - 1]);
    REQUIRE(ann[i] < ann[i - 1]);
  }
  REQUIRE(gap.back() < 1e-3 * ew);
  // a blow-up run without an estimate cannot be windowed
  REQUIRE_THROWS_AS(windowed_energy_scan(tr, {1.0}, 4.0), DomainError);
}
