#pragma once

#include <chrono>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bubbleflow/cli/config.hpp"
#include "bubbleflow/core/inequalities.hpp"
#include "bubbleflow/modulation/lemmas.hpp"

namespace bubbleflow::cli {

struct CheckCase {
  std::string suite;
  std::string name;
  bool passed = true;
  std::string message;
  double seconds = 0.0;
};

inline CheckCase named(std::string suite, std::string name) {
  CheckCase c;
  c.suite = std::move(suite);
  c.name = std::move(name);
  return c;
}

inline const std::vector<std::string> suite_names = {"trapping", "sobolev",     "hardy",     "coercivity",
                                                     "expansion", "interaction", "modulation"};

struct CheckContext {
  int dim = 5;
  GridPtr grid;
  std::size_t samples = 100;
  std::optional<std::string> constants;

  /// Spectrum, Z profile and c0 are computed once per run.
  const SpectrumReport& spectrum() {
    if (!spec_) spec_ = solve_spectrum(dim);
    return *spec_;
  }
  const ZProfile& z() {
    if (!z_) z_ = build_z_profile(dim, spectrum().eigen).profile;
    return *z_;
  }

private:
  std::optional<SpectrumReport> spec_;
  std::optional<ZProfile> z_;
};

namespace detail {

inline std::string sci(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

inline std::vector<RadialField> corpus(const GridPtr& g, std::size_t n, std::uint64_t seed, RandomFieldSpec spec = {}) {
  std::mt19937_64 rng(seed);
  std::vector<RadialField> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_compact_field(g, rng, spec));
  return out;
}

} // namespace detail

inline std::vector<CheckCase> suite_sobolev(CheckContext& ctx) {
  std::vector<CheckCase> out;
  const auto fields = detail::corpus(ctx.grid, ctx.samples, 1000 + ctx.dim);
  for (double R : {0.3, 1.0, 3.0, 10.0}) {
    auto c = named("sobolev", "radial_sobolev_R=" + detail::sci(R));
    std::size_t bad = 0;
    for (const auto& v : fields)
      if (!radial_sobolev_bound(v, R).holds()) ++bad;
    c.passed = bad == 0;
    c.message = std::to_string(bad) + " violations in " + std::to_string(fields.size()) + " fields";
    out.push_back(c);
  }
  return out;
}

inline std::vector<CheckCase> suite_hardy(CheckContext& ctx) {
  std::vector<CheckCase> out;
  const auto fields = detail::corpus(ctx.grid, ctx.samples, 2000 + ctx.dim);
  for (double R : {0.0, 0.3, 1.0, 3.0}) {
    auto c = named("hardy", "hardy_tail_R=" + detail::sci(R));
    std::size_t bad = 0;
    for (const auto& v : fields)
      if (!hardy_tail_constant_check(v, R).holds()) ++bad;
    c.passed = bad == 0;
    c.message = std::to_string(bad) + " violations in " + std::to_string(fields.size()) + " fields";
    out.push_back(c);
  }
  return out;
}

/// Fields are rescaled so the tail norm sits at half the certification threshold.
inline std::vector<CheckCase> suite_trapping(CheckContext& ctx) {
  std::vector<CheckCase> out;
  const auto fields = detail::corpus(ctx.grid, ctx.samples, 3000 + ctx.dim);
  const double delta0 = default_trapping_delta(ctx.dim);
  for (double R : {0.0, 1.0, 3.0}) {
    auto c = named("trapping", "trapping_R=" + detail::sci(R));
    std::size_t bad = 0, certified = 0;
    for (auto v : fields) {
      const double tail = enorm(v, R, infinity);
      if (!(tail > 0.0)) continue;
      v *= 0.5 * delta0 / tail;
      const auto t = trapping_bound(v, R, delta0);
      if (!t.certified) continue;
      ++certified;
      if (!t.bound_holds()) ++bad;
    }
    c.passed = bad == 0 && certified > 0;
    c.message = std::to_string(bad) + " violations in " + std::to_string(certified) + " certified fields";
    out.push_back(c);
  }
  return out;
}

inline std::vector<CheckCase> suite_coercivity(CheckContext& ctx) {
  std::vector<CheckCase> out;
  const auto& eig = ctx.spectrum().eigen;
  const auto& z = ctx.z();
  double c0 = 0.0;
  std::string source;
  if (ctx.constants) {
    if (auto m = io::load_constants(*ctx.constants, ctx.dim)) {
      c0 = m->c0;
      source = "constants manifest";
    }
  }
  if (source.empty()) {
    c0 = calibrate_c0(eig, z).c0;
    source = "calibrated";
  }
  const BubbleConfig one{{1}, {1.0}};
  std::mt19937_64 rng(4000 + ctx.dim);
  std::size_t bad = 0, nonortho = 0;
  double worst = infinity;
  for (std::size_t i = 0; i < ctx.samples; ++i) {
    const auto g = project_z_orthogonal(random_compact_field(eig.y.grid_ptr(), rng), one, z);
    const auto res = coercivity_form(g, one, eig, z, c0);
    if (!res.orthogonal) ++nonortho;
    if (!res.holds()) ++bad;
    worst = std::min(worst, res.ratio());
  }
  auto c = named("coercivity", "coercivity_c0");
  c.passed = bad == 0 && nonortho == 0;
  c.message = std::to_string(bad) + " violations, " + std::to_string(nonortho) + " non-orthogonal; c0=" + detail::sci(c0) +
              " (" + source + "), min ratio " + detail::sci(worst);
  out.push_back(c);

  auto n = named("coercivity", "single_negative_direction");
  const auto& sp = ctx.spectrum();
  n.passed = sp.negative_count_coarse == 1 && sp.negative_count_fine == 1;
  n.message = "negative eigenvalues: " + std::to_string(sp.negative_count_coarse) + " / " + std::to_string(sp.negative_count_fine);
  out.push_back(n);
  return out;
}

inline const std::vector<double> lemma_epsilons = {1e-2, 1e-3, 1e-4};

inline std::vector<CheckCase> suite_expansion(CheckContext& ctx) {
  std::vector<CheckCase> out;
  const int D = ctx.dim;
  auto k = named("expansion", "coefficient_closed_form");
  const double closed = std::pow(D * (D - 2.0), 0.5 * D) / D;
  k.passed = std::abs(expansion_coefficient(D) - closed) <= 1e-12 * closed;
  k.message = "coefficient " + detail::sci(expansion_coefficient(D));
  out.push_back(k);

  auto c = named("expansion", "theta_decreasing");
  std::vector<double> th;
  for (double eps : lemma_epsilons) th.push_back(energy_expansion_check(D, BubbleConfig{{1, 1}, {eps, 1.0}}).theta());
  c.passed = true;
  c.message = "theta:";
  for (std::size_t i = 0; i < th.size(); ++i) {
    c.message += " " + detail::sci(th[i]);
    if (i > 0 && !(th[i] < th[i - 1])) c.passed = false;
  }
  out.push_back(c);
  return out;
}

inline std::vector<CheckCase> suite_interaction(CheckContext& ctx) {
  std::vector<CheckCase> out;
  const int D = ctx.dim;
  auto k = named("interaction", "coefficient_closed_form");
  const double closed = (D - 2.0) / (2.0 * D) * std::pow(D * (D - 2.0), 0.5 * D);
  k.passed = std::abs(interaction_coefficient(D) - closed) <= 1e-12 * closed &&
             std::abs(interaction_coefficient(D) / expansion_coefficient(D) - 0.5 * (D - 2.0)) <= 1e-12 * D;
  k.message = "coefficient " + detail::sci(interaction_coefficient(D));
  out.push_back(k);

  auto c = named("interaction", "pairing_ratio_tightening");
  std::vector<double> dev;
  c.message = "pairing/leading:";
  for (double eps : lemma_epsilons) {
    const double r = interaction_pairing(D, BubbleConfig{{1, 1}, {eps, 1.0}}, 2).ratio();
    dev.push_back(std::abs(r - 1.0));
    c.message += " " + detail::sci(r);
  }
  c.passed = true;
  for (std::size_t i = 1; i < dev.size(); ++i)
    if (!(dev[i] < dev[i - 1])) c.passed = false;
  out.push_back(c);
  return out;
}

inline std::vector<CheckCase> suite_modulation(CheckContext& ctx) {
  std::vector<CheckCase> out;
  const auto& eig = ctx.spectrum().eigen;
  const auto& z = ctx.z();
  const auto& grid = ctx.grid;

  auto exact = named("modulation", "exact_bubble_round_trip");
  double worst = 0.0;
  for (double lam : {0.3, 1.0, 3.0}) {
    const auto v = bubble_field(grid, lam);
    const auto st = fit_modulation(v, BubbleConfig{{1}, {lam * 1.3}}, eig, z);
    worst = std::max(worst, st.converged ? std::abs(st.config.scales[0] / lam - 1.0) : infinity);
  }
  exact.passed = worst <= 1e-8;
  exact.message = "max relative scale error " + detail::sci(worst);
  out.push_back(exact);

  auto pert = named("modulation", "z_orthogonal_perturbation_round_trip");
  std::mt19937_64 rng(5000 + ctx.dim);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t bad = 0;
  double worst_lam = 0.0, worst_res = 0.0;
  for (std::size_t i = 0; i < ctx.samples; ++i) {
    const double lam = std::pow(10.0, unit(rng) - 0.5);
    const BubbleConfig truth{{1}, {lam}};
    auto p = project_z_orthogonal(random_compact_field(grid, rng, RandomFieldSpec{0.1 * lam, 10.0 * lam, 4, 1.0}), truth, z);
    p *= 0.01 * bubble_enorm(ctx.dim) / std::max(enorm(p), 1e-300);
    const auto v = bubble_field(grid, lam) + p;
    const auto st = fit_modulation(v, BubbleConfig{{1}, {1.2 * lam}}, eig, z);
    const double err = std::abs(st.config.scales[0] / lam - 1.0);
    worst_lam = std::max(worst_lam, err);
    worst_res = std::max(worst_res, st.max_residual());
    if (!st.converged || err > 0.05 || st.max_residual() > 1e-10) ++bad;
  }
  pert.passed = bad == 0;
  pert.message = std::to_string(bad) + " failures in " + std::to_string(ctx.samples) + "; worst scale error " +
                 detail::sci(worst_lam) + ", worst residual " + detail::sci(worst_res);
  out.push_back(pert);

  auto two = named("modulation", "two_bubble_round_trip");
  const BubbleConfig truth{{1, -1}, {0.02, 1.0}};
  const auto st = fit_modulation(multi_bubble(truth, grid), BubbleConfig{{1, -1}, {0.025, 0.9}}, eig, z);
  double e2 = 0.0;
  for (std::size_t j = 0; j < 2; ++j) e2 = std::max(e2, std::abs(st.config.scales[j] / truth.scales[j] - 1.0));
  two.passed = st.converged && e2 <= 1e-8;
  two.message = "max relative scale error " + detail::sci(e2);
  out.push_back(two);
  return out;
}

inline std::vector<CheckCase> run_suite(const std::string& name, CheckContext& ctx) {
  using Fn = std::vector<CheckCase> (*)(CheckContext&);
  static const std::map<std::string, Fn> table = {
      {"trapping", suite_trapping},     {"sobolev", suite_sobolev},         {"hardy", suite_hardy},
      {"coercivity", suite_coercivity}, {"expansion", suite_expansion},     {"interaction", suite_interaction},
      {"modulation", suite_modulation}};
  const auto it = table.find(name);
  if (it == table.end()) throw ConfigError("unknown suite '" + name + "'");
  std::vector<CheckCase> cases;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    cases = it->second(ctx);
  } catch (const std::exception& e) {
    auto c = named(name, "suite_error");
    c.passed = false;
    c.message = e.what();
    cases.push_back(c);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (auto& c : cases) c.seconds = secs / static_cast<double>(cases.size());
  return cases;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '&': out += "&amp;"; break;
    case '"': out += "&quot;"; break;
    default: out += ch;
    }
  }
  return out;
}

/// JUnit-style report, one <testsuite> per suite in first-seen order.
inline void write_junit(std::ostream& os, const std::vector<CheckCase>& cases) {
  std::vector<std::string> order;
  for (const auto& c : cases)
    if (std::find(order.begin(), order.end(), c.suite) == order.end()) order.push_back(c.suite);
  std::size_t failures = 0;
  for (const auto& c : cases) failures += c.passed ? 0 : 1;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<testsuites name=\"bubbleflow.check\" tests=\"" << cases.size() << "\" failures=\"" << failures << "\">\n";
  for (const auto& s : order) {
    std::size_t n = 0, f = 0;
    double secs = 0.0;
    for (const auto& c : cases)
      if (c.suite == s) {
        ++n;
        f += c.passed ? 0 : 1;
        secs += c.seconds;
      }
    os << "  <testsuite name=\"" << s << "\" tests=\"" << n << "\" failures=\"" << f << "\" time=\"" << io::fmt(secs) << "\">\n";
    for (const auto& c : cases) {
      if (c.suite != s) continue;
      os << "    <testcase classname=\"bubbleflow." << s << "\" name=\"" << xml_escape(c.name) << "\" time=\""
         << io::fmt(c.seconds) << "\">";
      if (c.passed)
        os << "<system-out>" << xml_escape(c.message) << "</system-out>";
      else
        os << "<failure message=\"" << xml_escape(c.message) << "\"/>";
      os << "</testcase>\n";
    }
    os << "  </testsuite>\n";
  }
  os << "</testsuites>\n";
}

} // namespace bubbleflow::cli
