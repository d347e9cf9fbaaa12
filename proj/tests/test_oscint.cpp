#include <catch2/catch_amalgamated.hpp>

#include "oscintlab/builtins.hpp"
#include "oscintlab/oscint.hpp"

using namespace oscintlab;
using namespace oscintlab::builtins;

namespace {
const Box Ky = Box::cube(1, 1.5);
const EpsGrid g8 = EpsGrid::dyadic(3, 10);
}  // namespace

TEST_CASE("Fourier inversion: I(y xi, 1, u) = u(0)") {
  PhaseNet p = phase_linear(1, Box::cube(1, 1.5));
  SymbolNet one = sym_one(1, 1, Ky);
  for (auto u : {gf_bump(0.0, 1.0), gf_gaussian(0.4)}) {
    OscIntegrator eng(p, one, u, g8);
    auto [v, d] = eng.evaluate(0, -1);
    Cplx expect = u.value_at(g8[0], std::vector<double>{0.0});
    CAPTURE(u.label, d.k_used, d.xi_used, d.tail_estimate);
    REQUIRE(std::abs(v - expect) < 1e-6 * std::abs(expect));
  }
}

TEST_CASE("k-independence of the regularized integral") {
  PhaseNet p = phase_linear(1, Box::cube(1, 1.5));
  GFunc u = gf_gaussian(0.35, 8.0);
  for (double m : {0.0, 1.0}) {
    SymbolNet a = sym_bracket_power(1, 1, m, Ky);
    OscIntegrator eng(p, a, u, g8);
    int k = eng.default_k();
    auto [v1, d1] = eng.evaluate(0, k);
    auto [v2, d2] = eng.evaluate(0, k + 1);
    CAPTURE(m, k, d1.xi_used, d2.xi_used);
    REQUIRE(std::abs(v1 - v2) <= 1e-6 * std::abs(v1));
  }
}

TEST_CASE("agreement with the damped oracle") {
  PhaseNet p = phase_linear(1, Box::cube(1, 1.5));
  GFunc u = gf_gaussian(0.35);
  SymbolNet a = sym_bracket_power(1, 1, 1.0, Ky);
  OscIntegrator eng(p, a, u, g8);
  auto [v, d] = eng.evaluate(0, eng.default_k());
  // delta sequence scaled to the spectrum width of u (sigma = 0.35)
  auto oracle = oracle_damped(p, a, u, g8[0], {0.02, 0.01, 0.005, 0.0025, 0.00125});
  CAPTURE(oracle.error_estimate, std::abs(v - oracle.value));
  REQUIRE(!oracle.inconclusive);
  REQUIRE(std::abs(v - oracle.value) <=
          std::max(1e-4 * std::max(1.0, std::abs(v)), 3.0 * oracle.error_estimate));
}

TEST_CASE("linearity in the amplitude") {
  PhaseNet p = phase_linear(1, Box::cube(1, 1.5));
  GFunc u = gf_bump(0.2, 0.9);
  SymbolNet a1 = sym_bracket_power(1, 1, 1.0, Ky);
  SymbolNet a2 = sym_one(1, 1, Ky);
  Cplx alpha(0.7, -0.3);
  SymbolNet combo = make_symbol(1, 1, 1.0, Ky, [alpha](double, auto args) {
    using T = std::remove_cvref_t<decltype(args[0])>;
    std::span<const T> xi(args.data() + 1, size_t{1});
    return make_const(args[0], alpha) * bracket(xi) + make_const(args[0], Cplx(1, 0));
  });
  int k = 5;
  OscIntegrator e1(p, a1, u, g8), e2(p, a2, u, g8), ec(p, combo, u, g8);
  Cplx v1 = e1.evaluate(0, k).first, v2 = e2.evaluate(0, k).first, vc = ec.evaluate(0, k).first;
  REQUIRE(std::abs(vc - (alpha * v1 + v2)) < 1e-8 * (1.0 + std::abs(vc)));
}

TEST_CASE("small k is rejected when the amplitude order requires more") {
  PhaseNet p = phase_linear(1, Box::cube(1, 1.5));
  GFunc u = gf_bump(0.0, 1.0);
  SymbolNet a = sym_bracket_power(1, 1, 2.0, Ky);
  OscIntegrator eng(p, a, u, g8);
  REQUIRE_THROWS_AS(eng.evaluate(0, 2), PreconditionError);
}

TEST_CASE("fio_apply: identity and differentiation phases") {
  PhaseNet p = phase_shift(1, Box::cube(2, 2.0));
  GFunc u = gf_gaussian(0.5);
  std::vector<std::vector<double>> xs = {{-0.6}, {-0.1}, {0.0}, {0.4}, {0.9}};

  SECTION("a = 1 reproduces u(x)") {
    SymbolNet one = sym_one(2, 1, Box::cube(2, 2.0));
    auto res = fio_apply(p, one, u, xs, g8);
    for (size_t i = 0; i < xs.size(); ++i) {
      Cplx expect = u.value_at(g8[0], xs[i]);
      REQUIRE(std::abs(res.values[i][0] - expect) < 1e-6 * (1.0 + std::abs(expect)));
    }
  }
  SECTION("a = i xi differentiates") {
    SymbolNet dsym = sym_i_xi1(2, 1, Box::cube(2, 2.0));
    auto res = fio_apply(p, dsym, u, xs, g8);
    for (size_t i = 0; i < xs.size(); ++i) {
      double x = xs[i][0];
      // d/dx of the truncated gaussian on its plateau
      double sigma = 0.5;
      double expect = -x / (sigma * sigma) * std::exp(-0.5 * x * x / (sigma * sigma));
      REQUIRE(std::abs(res.values[i][0] - Cplx(expect, 0)) < 1e-5 * (1.0 + std::abs(expect)));
    }
  }
}

TEST_CASE("small-scale family reproduces the scaled point mass") {
  PhaseNet p = phase_small_scale(Box::cube(2, 2.0));
  GFunc f = gf_bump(0.0, 1.0);
  SymbolNet one = sym_one(2, 1, Box::cube(2, 2.0));
  EpsGrid grid = EpsGrid::dyadic(3, 18);
  // x-lattice scaled with eps: x = eps * s for s in [-1, 1]
  for (size_t e : {size_t{0}, size_t{7}, size_t{15}}) {
    double eps = grid[e];
    for (double s : {0.0, 0.4, -0.7}) {
      std::vector<double> x0 = {eps * s};
      PhaseNet ps = p.slice(x0);
      SymbolNet as = slice_symbol(one, x0, 1);
      OscIntegrator eng(ps, as, f, grid);
      auto [got, diag] = eng.evaluate(e, -1);
      Cplx expect = Cplx(1.0 / eps, 0) * f.value_at(eps, std::vector<double>{s});
      CAPTURE(eps, s, diag.route_direct);
      REQUIRE(std::abs(got - expect) <= 1e-4 * std::abs(expect));
    }
  }
}

TEST_CASE("negligible phase perturbation perturbs the value negligibly") {
  PhaseNet p1 = phase_linear(1, Box::cube(1, 1.5));
  PhaseNet p2 = make_phase(
      0, 1, 1, Box::cube(1, 1.5),
      [](double eps, auto args) {
        return args[0] * args[1] * (1.0 + std::exp(-1.0 / eps));
      },
      "perturbed-linear");
  GFunc u = gf_bump(0.0, 1.0);
  SymbolNet one = sym_one(1, 1, Ky);
  EpsGrid grid = EpsGrid::dyadic(3, 10);
  OscOptions opt;
  auto r1 = osc_integral(p1, one, u, grid, -1, opt);
  auto r2 = osc_integral(p2, one, u, grid, -1, opt);
  // Differences below the quadrature tolerance are measurement zeros.
  std::vector<double> diffs(grid.size());
  for (size_t e = 0; e < grid.size(); ++e) {
    double d = std::abs(r1.value.samples[e] - r2.value.samples[e]);
    double floor = 10.0 * opt.rel_tol * std::abs(r1.value.samples[e]);
    diffs[e] = d <= floor ? 0.0 : d;
  }
  auto cls = classify_net(diffs, grid);
  REQUIRE(cls.kind == NetKind::Negligible);
}
