#include <catch2/catch_amalgamated.hpp>

#include "oscintlab/builtins.hpp"
#include "oscintlab/symbols.hpp"

using namespace oscintlab;
using namespace oscintlab::builtins;

namespace {
const EpsGrid g = EpsGrid::dyadic();
const Box K1 = Box::cube(1, 1.0);
}  // namespace

TEST_CASE("seminorm of basic symbols") {
  SECTION("constant symbol, any j") {
    SymbolNet a = sym_one(1, 1, K1);
    auto t = seminorm(a, K1, 2, 0.0, 1.0, 0.0, g);
    for (double v : t.values) REQUIRE(std::abs(v - 1.0) < 1e-12);
  }
  SECTION("bracket squared at matched order") {
    SymbolNet a = sym_bracket_power(1, 1, 2.0, K1);
    auto t = seminorm(a, K1, 0, 2.0, 1.0, 0.0, g);
    for (double v : t.values) REQUIRE(std::abs(v - 1.0) < 1e-12);
  }
  SECTION("eps^{-1} bracket") {
    SymbolNet a = sym_eps_bracket(1, 1, 1.0, 1.0, K1);
    auto t = seminorm(a, K1, 0, 1.0, 1.0, 0.0, g);
    for (size_t e = 0; e < g.size(); ++e) REQUIRE(std::abs(t.values[e] - 1.0 / g[e]) < 1e-9 / g[e]);
  }
  SECTION("seminorm rejects boxes outside the domain") {
    SymbolNet a = sym_one(1, 1, K1);
    REQUIRE_THROWS_AS(seminorm(a, Box::cube(1, 2.0), 0, 0, 1, 0, g), InvalidInput);
  }
}

TEST_CASE("seminorm is submultiplicative across products at matched orders") {
  SymbolNet a = sym_bracket_power(1, 1, 2.0, K1);
  SymbolNet b = sym_eps_bracket(1, 1, 1.0, 1.0, K1);
  SymbolNet ab = product_symbol(a, b);
  auto ta = seminorm(a, K1, 0, 2.0, 1.0, 0.0, g);
  auto tb = seminorm(b, K1, 0, 1.0, 1.0, 0.0, g);
  auto tab = seminorm(ab, K1, 0, 3.0, 1.0, 0.0, g);
  for (size_t e = 0; e < g.size(); ++e)
    REQUIRE(tab.values[e] <= ta.values[e] * tb.values[e] * (1 + 1e-12));
}

TEST_CASE("estimate_order recovers declared orders") {
  SECTION("bracket squared") {
    SymbolNet a = sym_bracket_power(1, 1, 2.0, K1);
    auto est = estimate_order(a, K1, g);
    REQUIRE(std::abs(est.m_hat - 2.0) <= 0.25 + 1e-9);
    REQUIRE(est.N_hat == 0);
    REQUIRE(!est.minus_infinity_flag);
  }
  SECTION("gaussian in xi is order -infinity") {
    SymbolNet a = sym_gaussian_xi(1, 1, K1);
    auto est = estimate_order(a, K1, g);
    REQUIRE(est.minus_infinity_flag);
  }
  SECTION("eps^{-1} bracket has m=1, N=1") {
    SymbolNet a = sym_eps_bracket(1, 1, 1.0, 1.0, K1);
    auto est = estimate_order(a, K1, g);
    REQUIRE(std::abs(est.m_hat - 1.0) <= 0.25 + 1e-9);
    REQUIRE(est.N_hat == 1);
  }
}

TEST_CASE("derivation lowers the estimated order") {
  SymbolNet a = sym_bracket_power(1, 1, 2.0, K1);
  SymbolNet da = derivative_symbol(a, {1}, {0});
  auto e0 = estimate_order(a, K1, g);
  auto e1 = estimate_order(da, K1, g);
  REQUIRE(e1.m_hat <= e0.m_hat - a.rho + 0.5 + 1e-9);
}

TEST_CASE("finite-difference mode matches analytic derivatives on spot checks") {
  SymbolNet a = sym_bracket_power(1, 1, 2.0, K1);
  SymbolNet fd = a;
  fd.mode = DerivMode::FiniteDifference;
  std::vector<double> x = {0.3};
  for (double r : {1.0, 4.0, 32.0}) {
    std::vector<double> xi = {r};
    for (auto [al, be] : std::vector<std::pair<MultiIndex, MultiIndex>>{
             {{1}, {0}}, {{2}, {0}}, {{1}, {1}}}) {
      Cplx ra = a.deriv(0.1, x, xi, al, be);
      Cplx rf = fd.deriv(0.1, x, xi, al, be);
      REQUIRE(std::abs(ra - rf) <= 1e-4 * (1.0 + std::abs(ra)));
    }
  }
}

TEST_CASE("check_elliptic variants") {
  SECTION("bracket power is e1-elliptic with s = 0") {
    SymbolNet a = sym_bracket_power(1, 1, 2.0, K1);
    auto w = check_elliptic(a, K1, g, EllipticVariant::E1);
    REQUIRE(w.ok);
    REQUIRE(w.s_exponent <= 0.05);
    for (double r : w.radius_net) REQUIRE(r == 1.0);
  }
  SECTION("eps * bracket^2 passes e1 (s = 1) but not e2") {
    SymbolNet a = sym_net_bracket(1, 1, [](double e) { return e; }, 2.0, K1, "eps*bracket^2");
    auto w1 = check_elliptic(a, K1, g, EllipticVariant::E1);
    REQUIRE(w1.ok);
    REQUIRE(std::abs(w1.s_exponent - 1.0) < 0.05);
    auto w2 = check_elliptic(a, K1, g, EllipticVariant::E2);
    REQUIRE(!w2.ok);
  }
  SECTION("xi_1 fails both variants (vanishes on a ray)") {
    SymbolNet a = sym_xi1(1, 2, K1);
    a.homogeneous = true;
    REQUIRE(!check_elliptic(a, K1, g, EllipticVariant::E1).ok);
    REQUIRE(!check_elliptic(a, K1, g, EllipticVariant::E2).ok);
  }
  SECTION("slow-scale lower bound passes e2") {
    SymbolNet a = sym_net_bracket(
        1, 1, [](double e) { return 1.0 / std::log(1.0 / e); }, 2.0, K1, "s_eps*bracket^2");
    auto w = check_elliptic(a, K1, g, EllipticVariant::E2);
    REQUIRE(w.ok);
  }
}

TEST_CASE("build_parametrix inverts elliptic symbols up to order -infinity") {
  auto run_case = [](const SymbolNet& a) {
    auto w = check_elliptic(a, a.domain, g, EllipticVariant::E1);
    REQUIRE(w.ok);
    SymbolNet p = build_parametrix(a, {a.domain}, {w}, g);
    // direct evaluation: p a ~ 1 for |xi| >= 2 R
    for (double eps : {g[0], g[8], g[15]}) {
      for (double r : {8.0, 64.0, 256.0}) {
        std::vector<double> x = {0.2}, xi = {r};
        Cplx prod = p.value_at(eps, x, xi) * a.value_at(eps, x, xi);
        REQUIRE(std::abs(prod - Cplx(1, 0)) < 1e-10);
      }
    }
    SymbolNet res = parametrix_residual(p, a);
    auto est = estimate_order(res, a.domain, g);
    REQUIRE(est.minus_infinity_flag);
  };
  SECTION("bracket squared") { run_case(sym_bracket_power(1, 1, 2.0, K1)); }
  SECTION("(1 + eps) bracket squared") {
    run_case(sym_net_bracket(1, 1, [](double e) { return 1.0 + e; }, 2.0, K1, "(1+eps)br2"));
  }
  SECTION("constant symbol: residual compactly supported in xi") {
    SymbolNet a = sym_one(1, 1, K1);
    auto w = check_elliptic(a, K1, g, EllipticVariant::E1);
    REQUIRE(w.ok);
    SymbolNet p = build_parametrix(a, {K1}, {w}, g);
    SymbolNet res = parametrix_residual(p, a);
    std::vector<double> x = {0.0};
    for (double r : {4.0, 16.0, 128.0}) {
      std::vector<double> xi = {r};
      REQUIRE(std::abs(res.value_at(g[3], x, xi)) < 1e-12);
    }
  }
  SECTION("missing witnesses are a precondition error") {
    SymbolNet a = sym_xi1(1, 2, K1);
    a.homogeneous = true;
    auto w = check_elliptic(a, K1, g, EllipticVariant::E1);
    REQUIRE_THROWS_AS(build_parametrix(a, {K1}, {w}, g), PreconditionError);
  }
}

TEST_CASE("microsupport scans") {
  EpsGrid gs = EpsGrid::dyadic(3, 10);
  ScanConfig cfg;
  cfg.deriv_depth = 2;
  cfg.xi_max = 64.0;

  SECTION("cone-supported cutoff has cone_supp inside the cone closure") {
    Box K2 = Box::cube(1, 1.0);
    SymbolNet a = sym_cone_cutoff(1, 2, {1.0, 0.0}, 0.9, 0.7, 0.0, K2);
    std::vector<std::vector<double>> xs = {{0.0}};
    auto dirs = sphere_directions(2, 8);
    auto rep = microsupport_scan(a, xs, dirs, MicroMode::ConeSupp, gs, cfg);
    for (const auto& c : rep.region.cells) {
      double cosang = c.dir[0];
      if (cosang > 0.95) REQUIRE(c.tag == CellTag::In);
      if (cosang < 0.4) REQUIRE(c.tag == CellTag::Out);
    }
  }
  SECTION("gaussian symbol is G-smoothing everywhere") {
    SymbolNet a = sym_gaussian_xi(1, 1, K1);
    std::vector<std::vector<double>> xs = {{-0.5}, {0.0}, {0.5}};
    auto dirs = sphere_directions(1, 2);
    auto rep = microsupport_scan(a, xs, dirs, MicroMode::G, gs, cfg);
    for (const auto& c : rep.region.cells) REQUIRE(c.tag == CellTag::Out);
  }
  SECTION("bracket power is not G-smoothing") {
    SymbolNet a = sym_bracket_power(1, 1, 2.0, K1);
    std::vector<std::vector<double>> xs = {{0.0}};
    auto dirs = sphere_directions(1, 2);
    auto rep = microsupport_scan(a, xs, dirs, MicroMode::G, gs, cfg);
    for (const auto& c : rep.region.cells) REQUIRE(c.tag == CellTag::In);
  }
  SECTION("slow-scale prefactor times cone cutoff is Ginf-out everywhere") {
    Box K2 = Box::cube(1, 1.0);
    SymbolNet base = sym_cone_cutoff(1, 2, {1.0, 0.0}, 0.9, 0.7, 0.0, K2);
    SymbolNet a = base;
    GenericFn f = base.fn;
    a.fn.arity = f.arity;
    a.fn.val = [f](double eps, std::span<const Cplx> args) {
      return f.val(eps, args) * std::log(1.0 / eps);
    };
    a.fn.jet = [f](double eps, std::span<const Jet> args) {
      return f.jet(eps, args) * Cplx(std::log(1.0 / eps), 0);
    };
    std::vector<std::vector<double>> xs = {{0.0}};
    auto dirs = sphere_directions(2, 8);
    auto rep = microsupport_scan(a, xs, dirs, MicroMode::Ginf, gs, cfg);
    for (const auto& c : rep.region.cells) REQUIRE(c.tag == CellTag::Out);
  }
}
