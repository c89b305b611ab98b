#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "bubbleflow/core/random.hpp"
#include "bubbleflow/spectral/coercivity.hpp"
#include "bubbleflow/spectral/linearized.hpp"
#include "bubbleflow/spectral/zprofile.hpp"
#include "oracles.hpp"

using namespace bubbleflow;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const SpectrumReport& spectrum(int dim) {
  static std::map<int, SpectrumReport> cache;
  auto it = cache.find(dim);
  if (it == cache.end()) it = cache.emplace(dim, solve_spectrum(dim)).first;
  return it->second;
}

RadialField lambda_w_field(const GridPtr& g, double lambda = 1.0) {
  const int dim = g->dim();
  return RadialField::sample(g, [&](double r) { return eval_lambda_bubble_scaled(dim, lambda, r); });
}

} // namespace

TEST_CASE("operator about zero is minus the Laplacian", "[spectral]") {
  const auto g = make_geometric_grid(3, 300, 50.0, 1.02);
  const LinearizedOperator op(g, std::vector<double>(g->size(), 0.0));
  std::mt19937_64 rng(7);
  for (int k = 0; k < 20; ++k) {
    const auto v = random_compact_field(g, rng);
    const auto lv = op.apply(v);
    const auto lap = laplacian(v);
    for (std::size_t i = 0; i < v.size(); ++i) REQUIRE_THAT(lv[i], WithinAbs(-lap[i], 1e-12 * (1 + std::abs(lap[i]))));
    REQUIRE(op.quadratic_form(v) > 0.0);
  }
}

TEST_CASE("linearized operator is self-adjoint", "[spectral]") {
  for (int dim : {3, 5}) {
    const auto g = make_geometric_grid(dim, 512, 100.0, 1.02);
    const auto op = LinearizedOperator::about_bubble(g);
    std::mt19937_64 rng(11 + dim);
    for (int k = 0; k < 50; ++k) {
      const auto u = random_compact_field(g, rng), v = random_compact_field(g, rng);
      const double a = inner(op.apply(u), v), b = inner(u, op.apply(v));
      const double scale = l2_norm(op.apply(u)) * l2_norm(v) + l2_norm(u) * l2_norm(op.apply(v));
      REQUIRE(std::abs(a - b) <= 1e-12 * scale);
      REQUIRE_THAT(inner(op.apply(u), u), WithinRel(op.quadratic_form(u), 1e-10));
    }
  }
}

TEST_CASE("potential at the origin is (D+2)/(D-2)", "[spectral]") {
  for (int dim : {3, 4, 5, 6}) {
    const auto g = make_geometric_grid(dim, 800, 50.0, 1.02);
    const auto op = LinearizedOperator::about_bubble(g);
    REQUIRE_THAT(op.potential()[0], WithinRel((dim + 2.0) / (dim - 2.0), 1e-6));
  }
}

TEST_CASE("Lambda W is a kernel direction under refinement", "[spectral]") {
  std::vector<double> forms;
  for (std::size_t n : {1024, 2048, 4096}) {
    const auto g = make_geometric_grid(5, n, 1e4, std::pow(1.02, 1024.0 / n));
    const auto lw = lambda_w_field(g);
    forms.push_back(std::abs(LinearizedOperator::about_bubble(g).quadratic_form(lw)) / enorm_sq(lw));
  }
  REQUIRE(forms[1] < 0.5 * forms[0]);
  REQUIRE(forms[2] < 0.5 * forms[1]);
  REQUIRE(forms[2] < 1e-4);
}

TEST_CASE("negative eigenvalue matches the shooting computation", "[spectral]") {
  for (int dim : {3, 4, 5, 6}) {
    const auto& rep = spectrum(dim);
    const double shoot = oracle::shooting_kappa2(dim);
    REQUIRE(rep.kappa2 > 0.0);
    REQUIRE_THAT(rep.kappa2, WithinRel(shoot, 1e-6));
    REQUIRE(rep.negative_count_coarse == 1);
    REQUIRE(rep.negative_count_fine == 1);
    REQUIRE(rep.refinement_change() <= 1e-4);
    REQUIRE(std::abs(rep.y_lambda_w) <= 1e-8);
  }
}

TEST_CASE("eigenfunction is a normalised positive ground state", "[spectral]") {
  for (int dim : {3, 5}) {
    const auto g = default_eigen_grid(dim);
    const auto e = negative_eigenpair(dim, g);
    REQUIRE_THAT(inner(e.y, e.y), WithinAbs(1.0, 1e-10));
    const auto op = LinearizedOperator::about_bubble(g);
    REQUIRE_THAT(op.quadratic_form(e.y), WithinRel(-e.kappa * e.kappa, 1e-10));
    // positive up to the exponentially small tail where roundoff dominates
    for (std::size_t i = 0; i < e.y.size(); ++i)
      if (g->node(i) < 30.0) REQUIRE(e.y[i] > 0.0);
    // eigen-equation residual is small against the eigenvalue
    const auto res = op.apply(e.y) + e.kappa * e.kappa * e.y;
    REQUIRE(l2_norm(res) < 1e-4);
  }
}

TEST_CASE("unresolved grids are refused", "[spectral]") {
  REQUIRE_THROWS_AS(negative_eigenpair(5, make_uniform_grid(5, 64, 80.0)), DomainError);
  REQUIRE_THROWS_AS(negative_eigenpair(2), DomainError);
  // a tiny domain pushes the ground state up: no negative eigenvalue at all
  REQUIRE_THROWS_AS(negative_eigenpair(5, make_geometric_grid(5, 400, 0.5, 1.001)), std::exception);
}

TEST_CASE("Z profile constraints", "[spectral]") {
  for (int dim : {3, 4, 5, 6}) {
    const auto& rep = spectrum(dim);
    const auto z = build_z_profile(dim, rep.eigen);
    REQUIRE(std::abs(z.y_residual) <= 1e-10);
    REQUIRE(z.lambda_w > 0.0);
    REQUIRE(z.profile.support_lo() > 0.0);
    REQUIRE(z.profile.support_hi() < rep.eigen.y.grid().r_max());
    // signed: a non-negative Z cannot be orthogonal to the positive ground state
    const auto zs = z.profile.sample(rep.eigen.y.grid_ptr());
    double lo = 0.0, hi = 0.0;
    for (double x : zs.values()) lo = std::min(lo, x), hi = std::max(hi, x);
    REQUIRE(lo < 0.0);
    REQUIRE(hi > 0.0);
  }
}

TEST_CASE("Z pairing with Lambda W scales linearly in lambda", "[spectral]") {
  const auto& rep = spectrum(5);
  const auto z = build_z_profile(5, rep.eigen).profile;
  const auto g = make_geometric_grid(5, 8192, 1e3, 1.002);
  const double base = z.pair(lambda_w_field(g));
  for (double lam : {0.5, 2.0}) REQUIRE_THAT(z.pair(lambda_w_field(g, lam), lam), WithinRel(lam * base, 1e-4));
  // with the lambda^{-1} normalisation used in the modulation equations it is invariant
  for (double lam : {0.5, 2.0}) REQUIRE_THAT(z.pair(lambda_w_field(g, lam), lam) / lam, WithinRel(base, 1e-4));
}

TEST_CASE("coercivity on Z-orthogonal fields", "[spectral]") {
  const auto& rep = spectrum(5);
  const auto z = build_z_profile(5, rep.eigen).profile;
  const auto cal = calibrate_c0(rep.eigen, z, 100, 12345);
  REQUIRE(cal.c0 > 0.0);
  REQUIRE_THAT(cal.c0, WithinRel(0.5 * cal.min_ratio, 1e-15));

  const auto g = rep.eigen.y.grid_ptr();
  const BubbleConfig one{{1}, {1.0}};
  const auto zero = coercivity_form(RadialField::zero(g), one, rep.eigen, z, cal.c0);
  REQUIRE(zero.form == 0.0);
  REQUIRE(zero.lower_bound == 0.0);

  std::mt19937_64 rng(999);
  for (int k = 0; k < 100; ++k) {
    const auto v = project_z_orthogonal(random_compact_field(g, rng), one, z);
    const auto res = coercivity_form(v, one, rep.eigen, z, cal.c0);
    REQUIRE(res.orthogonal);
    REQUIRE(res.holds());
  }
}

TEST_CASE("Lambda W violates the orthogonality hypothesis", "[spectral]") {
  const auto& rep = spectrum(5);
  const auto z = build_z_profile(5, rep.eigen).profile;
  const BubbleConfig one{{1}, {1.0}};
  std::vector<double> ratios;
  for (std::size_t n : {1024, 2048, 4096}) {
    const auto g = make_geometric_grid(5, n, 1e4, std::pow(1.02, 1024.0 / n));
    const auto res = coercivity_form(lambda_w_field(g), one, rep.eigen, z, 0.1);
    REQUIRE_FALSE(res.orthogonal);
    REQUIRE(res.enorm2 > 0.1);
    ratios.push_back(std::abs(res.form) / res.enorm2);
  }
  REQUIRE(ratios[2] < ratios[0]);
  REQUIRE(ratios[2] < 1e-3);
}

TEST_CASE("localised coercivity forms", "[spectral]") {
  const auto& rep = spectrum(5);
  const auto z = build_z_profile(5, rep.eigen).profile;
  const auto g = rep.eigen.y.grid_ptr();
  std::mt19937_64 rng(31);
  const BubbleConfig one{{1}, {1.0}};
  for (int k = 0; k < 20; ++k) {
    const auto v = project_z_orthogonal(random_compact_field(g, rng), one, z);
    for (auto kind : {LocalisationKind::global, LocalisationKind::outer, LocalisationKind::inner}) {
      const auto lc = localised_coercivity(v, rep.eigen, z, kind, 20.0, 0.01);
      REQUIRE(std::isfinite(lc.effective_C()));
    }
  }
  REQUIRE_THROWS_AS(localised_coercivity(RadialField::zero(g), rep.eigen, z, LocalisationKind::outer, 1.0, 0.6), DomainError);
}
