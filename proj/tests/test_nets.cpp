#include <catch2/catch_amalgamated.hpp>

#include "oscintlab/nets.hpp"

using namespace oscintlab;

namespace {

std::vector<double> sample_net(const EpsGrid& g, double (*f)(double)) {
  std::vector<double> out;
  for (double e : g) out.push_back(f(e));
  return out;
}

}  // namespace

TEST_CASE("fit_scale recovers exact power laws") {
  EpsGrid g = EpsGrid::dyadic();
  for (double b : {-10.0, -2.0, 0.0, 3.0, 10.0}) {
    std::vector<double> s;
    for (double e : g) s.push_back(std::pow(e, b));
    ScaleFit f = fit_scale(s, g);
    CAPTURE(b);
    REQUIRE(std::abs(f.slope - b) < 1e-2);
    REQUIRE(f.residual < 1e-8);
    REQUIRE(!f.superpolynomial_flag);
  }
}

TEST_CASE("fit_scale on the constant net") {
  EpsGrid g = EpsGrid::dyadic();
  std::vector<double> s(g.size(), 1.0);
  ScaleFit f = fit_scale(s, g);
  REQUIRE(std::abs(f.slope) < 1e-12);
  REQUIRE(f.residual < 1e-12);
}

TEST_CASE("fit_scale rejects short grids") {
  std::vector<double> v = {0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625, 0.0078125};
  REQUIRE_THROWS_AS(EpsGrid(v).validate(), InvalidInput);
}

TEST_CASE("classify_net on the catalogue") {
  EpsGrid g = EpsGrid::dyadic();

  auto kind_of = [&](std::vector<double> s) { return classify_net(s, g).kind; };

  SECTION("powers are moderate with the right bound") {
    auto nc = classify_net(sample_net(g, +[](double e) { return std::pow(e, -3.0); }), g);
    REQUIRE(nc.kind == NetKind::Moderate);
    REQUIRE(nc.N == 3);
  }
  SECTION("exp(-1/eps) is negligible") {
    REQUIRE(kind_of(sample_net(g, +[](double e) { return std::exp(-1.0 / e); })) ==
            NetKind::Negligible);
  }
  SECTION("eps^12 exceeds the q ceiling, negligible") {
    REQUIRE(kind_of(sample_net(g, +[](double e) { return std::pow(e, 12.0); })) ==
            NetKind::Negligible);
  }
  SECTION("log(1/eps) is slow scale") {
    REQUIRE(kind_of(sample_net(g, +[](double e) { return std::log(1.0 / e); })) ==
            NetKind::SlowScale);
  }
  SECTION("bounded oscillation is slow scale") {
    REQUIRE(kind_of(sample_net(g, +[](double e) { return 2.0 + std::sin(std::log(1.0 / e)); })) ==
            NetKind::SlowScale);
  }
  SECTION("exp(1/eps) is not moderate") {
    REQUIRE(kind_of(sample_net(g, +[](double e) { return std::exp(1.0 / e); })) ==
            NetKind::NotModerate);
  }
  SECTION("eps^{-1/2} log(1/eps) is moderate(1)") {
    auto nc = classify_net(
        sample_net(g, +[](double e) { return std::log(1.0 / e) / std::sqrt(e); }), g);
    REQUIRE(nc.kind == NetKind::Moderate);
    REQUIRE(nc.N == 1);
  }
}

TEST_CASE("classification moderateness bound shifts under eps^k multiplication") {
  EpsGrid g = EpsGrid::dyadic();
  std::vector<double> base;
  for (double e : g) base.push_back(std::pow(e, -3.0));
  NetClass n0 = classify_net(base, g);
  REQUIRE(n0.N == 3);
  for (int k : {1, 2, 3, 5}) {
    std::vector<double> shifted;
    for (size_t i = 0; i < g.size(); ++i) shifted.push_back(base[i] * std::pow(g[i], k));
    NetClass nk = classify_net(shifted, g);
    CAPTURE(k);
    REQUIRE(nk.N == std::max(3 - k, 0));
    REQUIRE(nk.kind != NetKind::NotModerate);
  }
  // Negligible stays negligible.
  std::vector<double> neg;
  for (double e : g) neg.push_back(std::exp(-1.0 / e));
  REQUIRE(classify_net(neg, g).kind == NetKind::Negligible);
  std::vector<double> neg2;
  for (size_t i = 0; i < g.size(); ++i) neg2.push_back(neg[i] * std::pow(g[i], 2));
  REQUIRE(classify_net(neg2, g).kind == NetKind::Negligible);
}

TEST_CASE("classification is invariant under grid reordering") {
  std::vector<double> eps;
  for (int i = 3; i <= 18; ++i) eps.push_back(std::ldexp(1.0, -i));
  std::reverse(eps.begin(), eps.end());
  EpsGrid g(eps);  // canonicalized to decreasing order
  REQUIRE(g[0] == std::ldexp(1.0, -3));
  std::vector<double> s;
  for (double e : g) s.push_back(std::pow(e, -2.0));
  REQUIRE(classify_net(s, g).N == 2);
}

TEST_CASE("is_strictly_nonzero power and slow-scale modes") {
  EpsGrid g = EpsGrid::dyadic();

  SECTION("eps^2 is strictly nonzero with witness 2") {
    std::vector<double> s;
    for (double e : g) s.push_back(e * e);
    auto v = is_strictly_nonzero(s, g, NonzeroMode::Power);
    REQUIRE(v.strictly_nonzero);
    REQUIRE(std::abs(v.witness_r - 2.0) < 1e-6);
  }
  SECTION("exp(-1/eps) fails the power test") {
    std::vector<double> s;
    for (double e : g) s.push_back(std::exp(-1.0 / e));
    REQUIRE(!is_strictly_nonzero(s, g, NonzeroMode::Power).strictly_nonzero);
  }
  SECTION("1/log(1/eps) passes the slow-scale test") {
    std::vector<double> s;
    for (double e : g) s.push_back(1.0 / std::log(1.0 / e));
    REQUIRE(is_strictly_nonzero(s, g, NonzeroMode::SlowScale).strictly_nonzero);
  }
  SECTION("eps fails the slow-scale test but passes power") {
    std::vector<double> s(g.begin(), g.end());
    REQUIRE(is_strictly_nonzero(s, g, NonzeroMode::SlowScale).strictly_nonzero == false);
    REQUIRE(is_strictly_nonzero(s, g, NonzeroMode::Power).strictly_nonzero);
  }
  SECTION("slow-scale verdicts survive multiplication by constants >= 1") {
    std::vector<double> s;
    for (double e : g) s.push_back(1.0 / std::log(1.0 / e));
    for (double c : {1.0, 2.0, 10.0}) {
      std::vector<double> cs;
      for (double x : s) cs.push_back(c * x);
      REQUIRE(is_strictly_nonzero(cs, g, NonzeroMode::SlowScale).strictly_nonzero);
    }
  }
}

TEST_CASE("slow_scale_test accepts log powers up to the ceiling") {
  EpsGrid g = EpsGrid::dyadic();
  for (int p : {1, 3}) {
    std::vector<double> s;
    for (double e : g) s.push_back(std::pow(std::log(1.0 / e), p));
    CAPTURE(p);
    REQUIRE(slow_scale_test(s, g));
  }
  // eps^{-1/2} is not slow scale
  std::vector<double> s;
  for (double e : g) s.push_back(1.0 / std::sqrt(e));
  REQUIRE(!slow_scale_test(s, g));
}
