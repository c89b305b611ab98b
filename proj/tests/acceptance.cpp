// Acceptance run: one PASS/FAIL line per criterion.
//   acceptance                 exit 1 if any criterion fails
//   acceptance --expect-red 5,6  exit 1 only if a criterion outside the list fails
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "bubbleflow/cli/commands.hpp"
#include "oracles.hpp"

using namespace bubbleflow;

namespace {

namespace fs = std::filesystem;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Verdict stationarity() {
  Verdict v{true, ""};
  for (int dim : {3, 5}) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto w = bubble_field(make_grid(GridSpec{dim}));
    SolverConfig cfg;
    cfg.snapshot_every = 0.05;
    const auto tr = evolve(w, cfg);
    double worst = 0.0;
    for (const auto& s : tr.snapshots) worst = std::max(worst, enorm(s.u - w) / enorm(w));
    const double secs = seconds_since(t0);
    const bool ok = tr.termination == Termination::completed && worst <= 1e-3 && secs <= 60.0;
    v.pass = v.pass && ok;
    v.detail += "D=" + std::to_string(dim) + " sup|u-W|/|W|=" + sci(worst) + " (" + sci(secs) + " s); ";
  }
  return v;
}

Verdict energy_ledger() {
  const auto g = make_grid(GridSpec{3});
  const auto u0 = RadialField::sample(g, [](double r) { return std::exp(-r * r); });
  std::vector<double> res;
  for (double dt : {5e-4, 2.5e-4}) {
    SolverConfig c;
    c.t_end = 0.1;
    c.dt_init = dt;
    c.adaptive = false;
    c.snapshot_every = c.t_end;
    const auto tr = evolve(u0, c);
    res.push_back(std::abs(dissipation_ledger(tr, 0.0, 0.1)) / energy(u0));
  }
  const double ratio = res[0] / res[1];
  return {res[0] <= 1e-3 && std::abs(ratio - 2.0) <= 0.25,
          "residual " + sci(res[0]) + " at dt=5e-4, " + sci(res[1]) + " at dt=2.5e-4, ratio " + sci(ratio)};
}

Verdict pohozaev() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int dim : {3, 4, 5, 6}) {
    const double grad = oracle::gradient_sq(dim), crit = oracle::critical_integral(dim);
    worst = std::max({worst, std::abs(grad / crit - 1.0), std::abs(bubble_gradient_sq(dim) / crit - 1.0)});
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-8 && secs <= 1.0, "max relative mismatch " + sci(worst) + " over D=3..6 (" + sci(secs) + " s)"};
}

Verdict spectral() {
  Verdict v{true, ""};
  for (int dim : {3, 4, 5, 6}) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto rep = solve_spectrum(dim);
    const double secs = seconds_since(t0);
    const double err = std::abs(rep.kappa2 / oracle::shooting_kappa2(dim) - 1.0);
    const bool ok = rep.negative_count_coarse == 1 && rep.negative_count_fine == 1 && err <= 1e-6 &&
                    std::abs(rep.y_lambda_w) <= 1e-8 && secs <= 30.0;
    v.pass = v.pass && ok;
    v.detail += "D=" + std::to_string(dim) + " kappa2 err " + sci(err) + " <Y|LW> " + sci(rep.y_lambda_w) + " (" + sci(secs) + " s); ";
  }
  return v;
}

const std::vector<double> family = {std::pow(10.0, -1.0), std::pow(10.0, -1.5), std::pow(10.0, -2.0)};

Verdict expansion() {
  std::vector<double> th;
  std::string d;
  for (double eps : family) {
    th.push_back(energy_expansion_check(5, BubbleConfig{{1, 1}, {eps, 1.0}}).theta());
    d += "theta(" + sci(eps) + ")=" + sci(th.back()) + " ";
  }
  const bool coeff = std::abs(expansion_coefficient(5) - std::pow(15.0, 2.5) / 5.0) <= 1e-12 * expansion_coefficient(5);
  return {coeff && th[1] < th[0] && th[2] < th[1] && th[2] <= 0.2, d + "(bound 0.2 at 1e-2)"};
}

Verdict interaction() {
  std::vector<double> dev;
  std::string d;
  for (double eps : family) {
    const double r = interaction_pairing(5, BubbleConfig{{1, 1}, {eps, 1.0}}, 2).ratio();
    dev.push_back(std::abs(r - 1.0));
    d += "ratio(" + sci(eps) + ")=" + sci(r) + " ";
  }
  return {dev[2] <= 0.1 && dev[1] < dev[0] && dev[2] < dev[1], d + "(band [0.9,1.1], monotone tightening)"};
}

Verdict modulation_round_trip() {
  const auto eig = solve_spectrum(5).eigen;
  const auto z = build_z_profile(5, eig).profile;
  const auto g = make_geometric_grid(5, 3000, 1e5, 1.008);
  double exact = 0.0;
  for (double lam : {0.1, 0.3, 1.0, 3.0, 10.0}) {
    const auto st = fit_modulation(bubble_field(g, lam), BubbleConfig{{1}, {1.2 * lam}}, eig, z);
    exact = std::max(exact, st.converged ? std::abs(st.config.scales[0] / lam - 1.0) : infinity);
  }
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t bad = 0;
  double worst_lam = 0.0, worst_res = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double lam = std::pow(10.0, unit(rng) - 0.5);
    const BubbleConfig truth{{1}, {lam}};
    auto p = project_z_orthogonal(random_compact_field(g, rng, {0.1 * lam, 10.0 * lam}), truth, z);
    p *= 0.01 * bubble_enorm(5) / enorm(p);
    const auto st = fit_modulation(bubble_field(g, lam) + p, BubbleConfig{{1}, {1.2 * lam}}, eig, z);
    const double err = std::abs(st.config.scales[0] / lam - 1.0);
    worst_lam = std::max(worst_lam, err);
    worst_res = std::max(worst_res, st.max_residual());
    if (!st.converged || err > 0.05 || st.max_residual() > 1e-10) ++bad;
  }
  return {exact <= 1e-8 && bad == 0, "exact scale error " + sci(exact) + "; perturbed corpus " + std::to_string(bad) +
                                          "/100 failures, worst scale error " + sci(worst_lam) + ", worst residual " + sci(worst_res)};
}

Verdict inequality_corpus() {
  std::size_t violations = 0, certified = 0, checks = 0;
  for (int dim : {3, 5}) {
    std::mt19937_64 rng(3000 + dim);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto g = make_geometric_grid(dim, 2048, 1e3, 1.005);
    for (int i = 0; i < 100; ++i) {
      const auto v = random_compact_field(g, rng, {0.05, 20.0, 4, std::pow(10.0, -3.0 * unit(rng))});
      for (double R : {0.1, 0.3, 1.0, 3.0, 10.0}) {
        ++checks;
        if (!radial_sobolev_bound(v, R).holds()) ++violations;
        if (!hardy_tail_constant_check(v, R).holds()) ++violations;
        const auto t = trapping_bound(v, R);
        if (t.certified) {
          ++certified;
          if (!t.bound_holds()) ++violations;
        }
      }
    }
  }
  return {violations == 0, std::to_string(violations) + " violations in " + std::to_string(checks) + " (field, R) pairs over D=3,5; " +
                               std::to_string(certified) + " trapping certificates"};
}

Verdict phase_behaviour() {
  std::vector<double> amps;
  for (int k = 5; k <= 15; ++k) amps.push_back(0.1 * k);
  const std::vector<std::size_t> ns = {1024, 2048};
  struct Cell {
    Outcome outcome = Outcome::undecided;
    double t_plus = 0.0, residual = 0.0;
  };
  std::vector<Cell> cells(amps.size() * ns.size());
  detail::parallel_for(cells.size(), std::max(1u, std::thread::hardware_concurrency()), [&](std::size_t i) {
    const double a = amps[i / ns.size()];
    const std::size_t n = ns[i % ns.size()];
    const auto g = make_geometric_grid(5, n, 1e3, std::pow(1.01, 1024.0 / static_cast<double>(n)));
    SolverConfig cfg;
    cfg.t_end = 50.0;
    cfg.snapshot_every = 2.5;
    const auto tr = evolve(a * bubble_field(g), cfg);
    const auto tl = analyze(tr);
    cells[i].outcome = classify(tl);
    if (tr.blowup) {
      cells[i].t_plus = tr.blowup->t_plus;
      cells[i].residual = tr.blowup->fit_residual;
    }
  });
  bool ok = true;
  std::string d;
  for (std::size_t k = 0; k < amps.size(); ++k) {
    const auto& lo = cells[k * ns.size()];
    const auto& hi = cells[k * ns.size() + 1];
    const double a = amps[k];
    const bool stable = lo.outcome == hi.outcome;
    if (a <= 0.9 + 1e-9) ok = ok && stable && lo.outcome == Outcome::dissipation;
    if (a >= 1.2 - 1e-9)
      ok = ok && stable && lo.outcome == Outcome::type_I_blowup && lo.residual <= 0.1 && hi.residual <= 0.1;
    char buf[96];
    std::snprintf(buf, sizeof buf, "a=%.1f:%s%s", a, to_string(lo.outcome).c_str(), stable ? "" : "/");
    d += buf;
    if (!stable) d += to_string(hi.outcome);
    if (lo.t_plus > 0.0) d += "(T+=" + sci(lo.t_plus) + ",res=" + sci(std::max(lo.residual, hi.residual)) + ")";
    d += " ";
  }
  return {ok, d};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict determinism() {
  const fs::path root = fs::path(BUBBLEFLOW_TEST_WORK) / "determinism";
  fs::remove_all(root);
  std::size_t compared = 0, differing = 0;
  for (double a : {0.8, 1.5}) {
    cli::RunConfig cfg;
    cfg.initial.kind = "scaled-bubble";
    cfg.initial.amplitude = a;
    cfg.solver.t_end = 2.0;
    const auto tag = "a" + std::to_string(static_cast<int>(10 * a));
    const auto first = cli::run_simulation(cfg, root / tag / "run1", 1);
    const auto second = cli::run_simulation(cfg, root / tag / "run2", 4);
    for (const auto& [key, name] : first.manifest.outputs) {
      if (name.size() < 4 || name.substr(name.size() - 4) != ".csv") continue;
      ++compared;
      if (slurp(root / tag / "run1" / name) != slurp(root / tag / "run2" / name)) ++differing;
    }
  }
  return {compared > 0 && differing == 0, std::to_string(compared) + " CSV files compared, " + std::to_string(differing) + " differ"};
}

} // namespace

int main(int argc, char** argv) {
  std::set<int> expect_red;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--expect-red" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string item;
      while (std::getline(ss, item, ',')) expect_red.insert(std::stoi(item));
    } else {
      std::fprintf(stderr, "usage: acceptance [--expect-red i,j,...]\n");
      return 2;
    }
  }

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"stationarity of W", stationarity},
      {"energy ledger", energy_ledger},
      {"Pohozaev balance", pohozaev},
      {"spectrum", spectral},
      {"energy expansion", expansion},
      {"interaction pairing", interaction},
      {"modulation round trip", modulation_round_trip},
      {"inequality corpus", inequality_corpus},
      {"phase behaviour of a*W", phase_behaviour},
      {"determinism", determinism},
  };
  int passed = 0, unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    while (!v.detail.empty() && (v.detail.back() == ' ' || v.detail.back() == ';')) v.detail.pop_back();
    std::printf("%s %2d %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), v.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
    if (v.pass)
      ++passed;
    else if (!expect_red.count(id))
      ++unexpected;
  }
  std::printf("%d/%zu criteria pass\n", passed, criteria.size());
  return unexpected == 0 ? 0 : 1;
}
