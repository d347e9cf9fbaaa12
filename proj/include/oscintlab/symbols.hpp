#pragma once

// eps-parametrized symbols a_eps(x, xi) with derivative oracles, seminorm
// tables, order estimation, ellipticity tests, parametrix construction and
// microsupport scans. Scans work on a compact x-lattice times a log-radial
// sphere lattice in xi; quantifiers over derivatives are truncated at a
// configurable depth. All verdicts are grid estimates and carry their
// fit evidence.

#include <optional>

#include "nets.hpp"
#include "profiles.hpp"

namespace oscintlab {

enum class DerivMode { Analytic, FiniteDifference };

struct SymbolNet {
  int nx = 1;   // base dimension
  int nxi = 1;  // frequency dimension
  double order = 0.0;
  double rho = 1.0;
  double delta = 0.0;
  Box domain;  // compact x-box the symbol is calibrated on
  bool homogeneous = false;  // degree-1 homogeneity in xi; evaluate on xi != 0
  DerivMode mode = DerivMode::Analytic;
  GenericFn fn;  // arguments: x_1..x_nx, xi_1..xi_nxi
  std::string label;

  void check() const {
    if (!(rho > 0.0) || !(delta < 1.0))
      throw InvalidInput("SymbolNet: requires rho > 0 and delta < 1");
    if (fn.arity != nx + nxi) throw InvalidInput("SymbolNet: arity mismatch");
    if (domain.dim() != nx) throw InvalidInput("SymbolNet: domain dimension mismatch");
  }

  Cplx value_at(double eps, std::span<const double> x, std::span<const double> xi) const {
    std::vector<double> pt(x.begin(), x.end());
    pt.insert(pt.end(), xi.begin(), xi.end());
    Cplx v = value_at_point(fn, eps, pt);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw EvaluationError("symbol evaluation returned non-finite value: " + label);
    return v;
  }

  // Full jet in the (x, xi) variables at total order `ord`.
  Jet jet_at(double eps, std::span<const double> x, std::span<const double> xi, int ord) const {
    std::vector<double> pt(x.begin(), x.end());
    pt.insert(pt.end(), xi.begin(), xi.end());
    if (mode == DerivMode::Analytic && fn.has_jet()) return jet_at_point(fn, eps, pt, ord);
    // Finite-difference synthesis. Step rule: coarse floor, x-steps scaled by
    // <xi>^delta, xi-steps by <xi>^rho (symbols vary on those scales).
    double br = japanese_bracket(norm2(xi));
    std::vector<double> steps(pt.size());
    for (int i = 0; i < nx; ++i) steps[i] = std::max(1e-4, 1e-3 * std::pow(br, delta));
    for (int i = 0; i < nxi; ++i) steps[nx + i] = std::max(1e-4, 1e-3 * std::pow(br, rho));
    auto vf = [this, eps](std::span<const double> p) -> Cplx {
      std::vector<Cplx> args(p.begin(), p.end());
      return fn.val(eps, args);
    };
    return fd_jet(vf, pt, ord, steps);
  }

  Cplx deriv(double eps, std::span<const double> x, std::span<const double> xi,
             const MultiIndex& alpha_xi, const MultiIndex& beta_x) const {
    MultiIndex combined(beta_x.begin(), beta_x.end());
    combined.insert(combined.end(), alpha_xi.begin(), alpha_xi.end());
    Jet j = jet_at(eps, x, xi, mi_order(combined));
    Cplx v = j.deriv_mi(combined);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw EvaluationError("symbol derivative returned non-finite value: " + label);
    return v;
  }
};

// Builds a SymbolNet from a templated functor (args x then xi).
template <class F>
SymbolNet make_symbol(int nx, int nxi, double m, Box domain, F f, std::string label = "",
                      double rho = 1.0, double delta = 0.0, bool homogeneous = false) {
  SymbolNet s;
  s.nx = nx;
  s.nxi = nxi;
  s.order = m;
  s.rho = rho;
  s.delta = delta;
  s.domain = std::move(domain);
  s.homogeneous = homogeneous;
  s.fn = erase_fn(nx + nxi, f);
  s.label = std::move(label);
  s.check();
  return s;
}

// Derivative of a symbol as a symbol (declared order drops per the type).
inline SymbolNet derivative_symbol(const SymbolNet& a, MultiIndex alpha_xi, MultiIndex beta_x) {
  SymbolNet out = a;
  int da = mi_order(alpha_xi), db = mi_order(beta_x);
  out.order = a.order - a.rho * da + a.delta * db;
  out.label = a.label + "'";
  MultiIndex combined(beta_x.begin(), beta_x.end());
  combined.insert(combined.end(), alpha_xi.begin(), alpha_xi.end());
  int extra = da + db;
  auto base = a;  // copy for capture
  out.fn.arity = a.fn.arity;
  out.fn.val = [base, combined, extra](double eps, std::span<const Cplx> args) -> Cplx {
    std::vector<double> pt(args.size());
    for (size_t i = 0; i < args.size(); ++i) pt[i] = args[i].real();
    Jet j = jet_at_point(base.fn, eps, pt, extra);
    return j.deriv_mi(combined);
  };
  out.fn.jet = [base, combined, extra](double eps, std::span<const Jet> args) -> Jet {
    // Re-seed at the argument point, evaluate at raised order, then extract
    // the derivative jet. Valid for arguments that are seeded variables.
    const JetSpace& s = args[0].space();
    std::vector<double> pt(args.size());
    for (size_t i = 0; i < args.size(); ++i) pt[i] = args[i].value().real();
    const JetSpace& hi = JetSpace::get(s.dim(), s.order() + extra);
    std::vector<Jet> hargs;
    hargs.reserve(args.size());
    for (size_t i = 0; i < args.size(); ++i)
      hargs.push_back(Jet::variable(hi, static_cast<int>(i), pt[i]));
    Jet j = base.fn.jet(eps, hargs);
    for (size_t v = 0; v < combined.size(); ++v)
      for (int r = 0; r < combined[v]; ++r) j = j.derivative(static_cast<int>(v));
    Jet out_j(s);
    for (int i = 0; i < s.size(); ++i) {
      MultiIndex e(s.dim());
      for (int v = 0; v < s.dim(); ++v) e[v] = hi.exponent(0)[v];  // zero
      for (int v = 0; v < s.dim(); ++v) e[v] = s.exponent(i)[v];
      out_j.coeff(i) = j.coeff_mi(e);
    }
    return out_j;
  };
  out.mode = a.mode;
  return out;
}

inline SymbolNet product_symbol(const SymbolNet& a, const SymbolNet& b) {
  if (a.nx != b.nx || a.nxi != b.nxi) throw InvalidInput("product_symbol: dimension mismatch");
  SymbolNet out = a;
  out.order = a.order + b.order;
  out.rho = std::min(a.rho, b.rho);
  out.delta = std::max(a.delta, b.delta);
  out.label = a.label + "*" + b.label;
  GenericFn fa = a.fn, fb = b.fn;
  out.fn.arity = a.fn.arity;
  out.fn.val = [fa, fb](double eps, std::span<const Cplx> args) {
    return fa.val(eps, args) * fb.val(eps, args);
  };
  out.fn.jet = [fa, fb](double eps, std::span<const Jet> args) {
    return fa.jet(eps, args) * fb.jet(eps, args);
  };
  return out;
}

// ---------------------------------------------------------------------------
// Scan configuration and raw derivative scans
// ---------------------------------------------------------------------------

struct ScanConfig {
  int x_per_axis = 3;        // x-lattice points per axis inside the box
  int sphere_count = 16;     // directions (2D); 1D always uses {+1,-1}
  double xi_min_shell = 1.0;
  double xi_max = 256.0;     // largest radial shell
  int deriv_depth = 2;       // truncation of "for all alpha, beta"
  double slope_tol = 0.05;   // admissible shell-growth slope
  double m_floor = 12.0;     // orders tested down to -m_floor
  double m_step = 0.25;
  // Scanned derivative magnitudes at or below this level count as numerical
  // zeros: decay below it cannot be distinguished from roundoff once the
  // <xi>^{|m|} weights amplify it.
  double noise_floor = 1e-13;
  NetConfig net;
};

namespace detail {

// Raw per-eps, per-shell derivative maxima (and zeroth-order minima) over an
// x-lattice times direction lattice.
struct SymbolScan {
  std::vector<double> shells;
  std::vector<MultiIndex> mis;  // combined (beta | alpha), |.| <= depth
  // max_abs[e][s][k]; min_abs0[e][s]
  std::vector<std::vector<std::vector<double>>> max_abs;
  std::vector<std::vector<double>> min_abs0;
  int nx = 1, nxi = 1;

  int mi_alpha_order(size_t k) const {
    int o = 0;
    for (int i = nx; i < nx + nxi; ++i) o += mis[k][i];
    return o;
  }
  int mi_beta_order(size_t k) const {
    int o = 0;
    for (int i = 0; i < nx; ++i) o += mis[k][i];
    return o;
  }
  double weight(size_t k, double r, double m, double rho, double delta) const {
    double br = japanese_bracket(r);
    return std::pow(br, -m + rho * mi_alpha_order(k) - delta * mi_beta_order(k));
  }
};

inline SymbolScan scan_symbol(const SymbolNet& a, const Box& K, int depth, const EpsGrid& grid,
                              const ScanConfig& cfg) {
  SymbolScan sc;
  sc.nx = a.nx;
  sc.nxi = a.nxi;
  sc.shells = radial_shells(cfg.xi_min_shell, cfg.xi_max);
  if (!a.homogeneous) {
    sc.shells.insert(sc.shells.begin(), 0.5);
    sc.shells.insert(sc.shells.begin(), 0.0);
  }
  sc.mis = all_multi_indices(a.nx + a.nxi, depth);
  auto xs = box_lattice(K, cfg.x_per_axis);
  auto dirs = sphere_directions(a.nxi, cfg.sphere_count);

  size_t ne = grid.size(), ns = sc.shells.size(), nk = sc.mis.size();
  sc.max_abs.assign(ne, std::vector<std::vector<double>>(ns, std::vector<double>(nk, 0.0)));
  sc.min_abs0.assign(ne, std::vector<double>(ns, std::numeric_limits<double>::infinity()));

  std::vector<double> xi(a.nxi);
  for (size_t e = 0; e < ne; ++e) {
    double eps = grid[e];
    for (size_t s = 0; s < ns; ++s) {
      double r = sc.shells[s];
      size_t ndir = (r == 0.0) ? 1 : dirs.size();
      for (size_t d = 0; d < ndir; ++d) {
        for (int i = 0; i < a.nxi; ++i) xi[i] = r * dirs[d][i];
        for (const auto& x : xs) {
          Jet j = a.jet_at(eps, x, xi, depth);
          for (size_t k = 0; k < nk; ++k) {
            double v = std::abs(j.deriv_mi(sc.mis[k]));
            if (!std::isfinite(v)) throw EvaluationError("scan_symbol: non-finite derivative");
            if (v <= cfg.noise_floor) v = 0.0;
            sc.max_abs[e][s][k] = std::max(sc.max_abs[e][s][k], v);
            if (k == 0) sc.min_abs0[e][s] = std::min(sc.min_abs0[e][s], v);
          }
        }
      }
    }
  }
  return sc;
}

// Weighted shell sups at order m; returns per-eps {table value, shell-growth
// slope over shells with r >= 1}.
inline void weighted_profile(const SymbolScan& sc, double m, double rho, double delta,
                             size_t e, double* table, double* shell_slope) {
  std::vector<double> lr, lw;
  double sup = 0.0;
  for (size_t s = 0; s < sc.shells.size(); ++s) {
    double w = 0.0;
    for (size_t k = 0; k < sc.mis.size(); ++k)
      w = std::max(w, sc.max_abs[e][s][k] * sc.weight(k, sc.shells[s], m, rho, delta));
    sup = std::max(sup, w);
    if (sc.shells[s] >= 1.0) {
      lr.push_back(std::log(japanese_bracket(sc.shells[s])));
      lw.push_back(std::log(std::max(w, kLogFloor)));
    }
  }
  *table = sup;
  *shell_slope = least_squares(lr, lw).slope;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Seminorm tables
// ---------------------------------------------------------------------------

struct SeminormTable {
  EpsGrid grid;
  Box K;
  int j = 0;
  double m = 0, rho = 1, delta = 0;
  std::vector<double> values;  // per eps

  ScaleFit fit(const NetConfig& cfg = {}) const { return fit_scale(values, grid, cfg); }
};

inline SeminormTable seminorm(const SymbolNet& a, const Box& K, int j, double m, double rho,
                              double delta, const EpsGrid& grid, const ScanConfig& cfg = {}) {
  if (!a.domain.contains_box(K)) throw InvalidInput("seminorm: K must lie inside the symbol domain");
  if (j > 6) throw InvalidInput("seminorm: derivative depth capped at 6");
  auto sc = detail::scan_symbol(a, K, j, grid, cfg);
  SeminormTable t;
  t.grid = grid;
  t.K = K;
  t.j = j;
  t.m = m;
  t.rho = rho;
  t.delta = delta;
  t.values.resize(grid.size());
  for (size_t e = 0; e < grid.size(); ++e) {
    double slope;
    detail::weighted_profile(sc, m, rho, delta, e, &t.values[e], &slope);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Order estimation
// ---------------------------------------------------------------------------

struct OrderEstimate {
  double m_hat = 0.0;
  int N_hat = 0;
  bool minus_infinity_flag = false;
  std::vector<double> table_at_m_hat;  // per eps
  ScaleFit fit;
};

// Least m (on the m_step lattice) whose weighted shell sups stay bounded in
// xi for every eps, with the eps-exponent fitted at that order. The sup over
// xi on a truncated lattice is always finite; boundedness is judged by the
// fitted growth slope across radial shells.
inline OrderEstimate estimate_order(const SymbolNet& a, const Box& K, const EpsGrid& grid,
                                    const ScanConfig& cfg = {}) {
  auto sc = detail::scan_symbol(a, K, cfg.deriv_depth, grid, cfg);
  double m_hi = std::max(a.order + 2.0, 4.0);
  auto admissible = [&](double m) {
    for (size_t e = 0; e < grid.size(); ++e) {
      double table, slope;
      detail::weighted_profile(sc, m, a.rho, a.delta, e, &table, &slope);
      if (slope > cfg.slope_tol) return false;
    }
    return true;
  };

  OrderEstimate out;
  if (!admissible(m_hi)) {
    // Growth beyond the tested range; report the ceiling.
    out.m_hat = m_hi;
  } else if (admissible(-cfg.m_floor)) {
    out.minus_infinity_flag = true;
    out.m_hat = -cfg.m_floor;
  } else {
    // Binary search on the m lattice: admissibility is monotone in m.
    double lo = -cfg.m_floor, hi = m_hi;  // lo inadmissible, hi admissible
    while (hi - lo > cfg.m_step * 1.0001) {
      double mid = 0.5 * (lo + hi);
      mid = std::round(mid / cfg.m_step) * cfg.m_step;
      if (mid <= lo || mid >= hi) break;
      if (admissible(mid))
        hi = mid;
      else
        lo = mid;
    }
    out.m_hat = hi;
  }

  out.table_at_m_hat.resize(grid.size());
  for (size_t e = 0; e < grid.size(); ++e) {
    double slope;
    detail::weighted_profile(sc, out.m_hat, a.rho, a.delta, e, &out.table_at_m_hat[e], &slope);
  }
  out.fit = fit_scale(out.table_at_m_hat, grid, cfg.net);
  NetClass nc = classify_net(out.table_at_m_hat, grid, cfg.net);
  out.N_hat = nc.kind == NetKind::Negligible ? 0 : nc.N;
  return out;
}

// ---------------------------------------------------------------------------
// Ellipticity and parametrix
// ---------------------------------------------------------------------------

enum class EllipticVariant { E1, E2 };

struct EllipticWitness {
  bool ok = false;
  EllipticVariant variant = EllipticVariant::E1;
  double s_exponent = 0.0;          // e1: |a| >= eps^s <xi>^m for |xi| >= R_eps
  std::vector<double> lower_net;    // per eps: the realized lower bound
  std::vector<double> radius_net;   // per eps: R_eps
  NonzeroVerdict lower_verdict;
  bool radius_ok = false;
};

inline EllipticWitness check_elliptic(const SymbolNet& a, const Box& K, const EpsGrid& grid,
                                      EllipticVariant variant, const ScanConfig& cfg = {}) {
  auto sc = detail::scan_symbol(a, K, 0, grid, cfg);
  EllipticWitness w;
  w.variant = variant;
  size_t ns = sc.shells.size();
  size_t first = 0;
  while (first < ns && sc.shells[first] < 1.0) ++first;

  w.lower_net.resize(grid.size());
  w.radius_net.resize(grid.size());
  for (size_t e = 0; e < grid.size(); ++e) {
    // lower(r) = min over shells >= r of the weighted zeroth-order minimum.
    std::vector<double> weighted(ns, 0.0);
    for (size_t s = 0; s < ns; ++s)
      weighted[s] = sc.min_abs0[e][s] * std::pow(japanese_bracket(sc.shells[s]), -a.order);
    double best = weighted[ns - 1];
    size_t chosen = ns - 1;
    double suffix_min = std::numeric_limits<double>::infinity();
    std::vector<double> smin(ns);
    for (size_t s = ns; s-- > first;) {
      suffix_min = std::min(suffix_min, weighted[s]);
      smin[s] = suffix_min;
    }
    for (size_t s = first; s < ns; ++s) {
      if (smin[s] >= 0.5 * smin[ns - 1]) {
        chosen = s;
        best = smin[s];
        break;
      }
    }
    w.lower_net[e] = best;
    w.radius_net[e] = std::max(sc.shells[chosen], 1.0);
  }

  if (variant == EllipticVariant::E1) {
    w.lower_verdict = is_strictly_nonzero(w.lower_net, grid, NonzeroMode::Power, cfg.net);
    w.s_exponent = w.lower_verdict.witness_r;
    std::vector<double> inv_r(grid.size());
    for (size_t e = 0; e < grid.size(); ++e) inv_r[e] = 1.0 / w.radius_net[e];
    w.radius_ok = is_strictly_nonzero(inv_r, grid, NonzeroMode::Power, cfg.net).strictly_nonzero;
  } else {
    w.lower_verdict = is_strictly_nonzero(w.lower_net, grid, NonzeroMode::SlowScale, cfg.net);
    w.radius_ok = slow_scale_test(w.radius_net, grid, cfg.net);
  }
  w.ok = w.lower_verdict.strictly_nonzero && w.radius_ok;
  return w;
}

// Partition of unity from smoothed box indicators, normalized by their sum.
struct PartitionOfUnity {
  std::vector<Box> cover;
  GenericFn bumps;  // arity nx, returns the j-th bump via captured index
  // For simplicity we expose one normalized member per cover box.
  std::vector<GenericFn> members;
};

inline PartitionOfUnity make_partition(const std::vector<Box>& cover) {
  if (cover.empty()) throw InvalidInput("make_partition: empty cover");
  PartitionOfUnity p;
  p.cover = cover;
  int nx = cover[0].dim();
  for (size_t j = 0; j < cover.size(); ++j) {
    auto member = [cover, j, nx](double, auto args) {
      using T = std::remove_cvref_t<decltype(args[0])>;
      auto raw = [&](size_t i) {
        T b = make_const(args[0], 1.0);
        for (int d = 0; d < nx; ++d) {
          double c = 0.5 * (cover[i].lo[d] + cover[i].hi[d]);
          double r = 0.5 * (cover[i].hi[d] - cover[i].lo[d]);
          b = b * plateau1d(args[d], c, 0.7 * r, 1.05 * r);
        }
        return b;
      };
      T num = raw(j);
      T den = make_const(args[0], 0.0);
      for (size_t i = 0; i < cover.size(); ++i) den += raw(i);
      if (std::abs(branch_value(den)) < 1e-14) return make_const(args[0], 0.0);
      return num * recip(den);
    };
    p.members.push_back(erase_fn(nx, member));
  }
  return p;
}

// Parametrix p with p * a = 1 + r, r of order -infinity, built from the
// inverse of a behind radial cutoffs opening at the per-box elliptic radii.
inline SymbolNet build_parametrix(const SymbolNet& a, const std::vector<Box>& cover,
                                  const std::vector<EllipticWitness>& witnesses,
                                  const EpsGrid& grid) {
  if (cover.size() != witnesses.size())
    throw InvalidInput("build_parametrix: cover/witness count mismatch");
  for (const auto& w : witnesses)
    if (!w.ok) throw PreconditionError("build_parametrix: ellipticity witnesses missing");

  PartitionOfUnity pu = make_partition(cover);

  // Per-box radius lookup: nearest eps on the witness grid (log scale).
  auto radius_for = [grid](const std::vector<double>& radii, double eps) {
    size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < grid.size(); ++i) {
      double d = std::abs(std::log(grid[i]) - std::log(eps));
      if (d < bd) {
        bd = d;
        best = i;
      }
    }
    return radii[best];
  };

  SymbolNet out = a;
  out.order = -a.order;
  out.label = "parametrix(" + a.label + ")";
  int nx = a.nx, nxi = a.nxi;
  GenericFn afn = a.fn;
  std::vector<std::vector<double>> radius_nets;
  for (const auto& w : witnesses) radius_nets.push_back(w.radius_net);
  auto members = pu.members;

  auto body = [afn, members, radius_nets, radius_for, nx, nxi](double eps, auto args) {
    using T = std::remove_cvref_t<decltype(args[0])>;
    std::span<const T> xi(args.data() + nx, static_cast<size_t>(nxi));
    double r_val = 0.0;
    for (int i = 0; i < nxi; ++i) {
      double c = branch_value(xi[i]);
      r_val += c * c;
    }
    r_val = std::sqrt(r_val);
    T acc = make_const(args[0], 0.0);
    for (size_t j = 0; j < members.size(); ++j) {
      double R = radius_for(radius_nets[j], eps);
      if (r_val <= R * (1.0 + 1e-12)) continue;  // cutoff vanishes on |xi| <= R
      T cut = radial_cutoff(xi, R, 2.0 * R);
      if (branch_value(cut) == 0.0 && r_val <= 2.0 * R) {
        // Inside the dead zone of the ramp; nothing to add.
        continue;
      }
      std::span<const T> xargs(args.data(), static_cast<size_t>(nx));
      T psi;
      if constexpr (std::is_same_v<T, Cplx>) {
        std::vector<Cplx> xv(xargs.begin(), xargs.end());
        psi = members[j].val(eps, xv);
      } else {
        std::vector<Jet> xv(xargs.begin(), xargs.end());
        psi = members[j].jet(eps, xv);
      }
      if constexpr (std::is_same_v<T, Cplx>) {
        std::vector<Cplx> all(args.begin(), args.end());
        acc += recip(afn.val(eps, all)) * cut * psi;
      } else {
        std::vector<Jet> all(args.begin(), args.end());
        acc += recip(afn.jet(eps, all)) * cut * psi;
      }
    }
    return acc;
  };
  out.fn = erase_fn(nx + nxi, body);
  out.mode = DerivMode::Analytic;
  return out;
}

// Residual p*a - 1 as a symbol (declared order 0; the content is that its
// estimated order is -infinity).
inline SymbolNet parametrix_residual(const SymbolNet& p, const SymbolNet& a) {
  SymbolNet prod = product_symbol(p, a);
  SymbolNet out = prod;
  out.order = 0.0;
  out.label = "residual(" + a.label + ")";
  GenericFn f = prod.fn;
  out.fn.arity = f.arity;
  out.fn.val = [f](double eps, std::span<const Cplx> args) { return f.val(eps, args) - Cplx(1, 0); };
  out.fn.jet = [f](double eps, std::span<const Jet> args) { return f.jet(eps, args) - Cplx(1, 0); };
  return out;
}

// ---------------------------------------------------------------------------
// Cone regions and microsupport scans
// ---------------------------------------------------------------------------

enum class CellTag { In, Out, Undecided };

struct ConeCell {
  std::vector<double> x;    // cell center
  std::vector<double> dir;  // unit direction
  CellTag tag = CellTag::Undecided;
  ScaleFit evidence;
};

struct ConeRegion {
  std::vector<ConeCell> cells;

  size_t count(CellTag t) const {
    size_t n = 0;
    for (const auto& c : cells)
      if (c.tag == t) ++n;
    return n;
  }
  // Base points carrying at least one In direction (projection to x).
  std::vector<std::vector<double>> base_in() const {
    std::vector<std::vector<double>> out;
    for (const auto& c : cells)
      if (c.tag == CellTag::In &&
          std::find(out.begin(), out.end(), c.x) == out.end())
        out.push_back(c.x);
    return out;
  }
};

enum class MicroMode { ConeSupp, G, Ginf };

struct MicrosupportReport {
  ConeRegion region;
  // Ginf mode: per-m exponent estimates for the last scanned cell family.
  std::vector<double> m_list;
};

// Scans (x, direction) cells. Each cell is probed on a small neighborhood of
// its center (x offsets within a fraction of the cell radius, directions
// within the cone half-angle) across the radial shells.
//
// Modes measure different axes of regularity, each truncated to the scan
// lattice: ConeSupp asks for eps-negligibility of the weighted sups; G asks
// for xi-decay faster than every tested order with eps-moderate constants;
// Ginf asks for one eps-exponent N valid across the tested order list
// (per-m exponents are fitted jointly and reported).
inline MicrosupportReport microsupport_scan(const SymbolNet& a,
                                            const std::vector<std::vector<double>>& x_centers,
                                            const std::vector<std::vector<double>>& directions,
                                            MicroMode mode, const EpsGrid& grid,
                                            const ScanConfig& cfg = {}, double x_radius = 0.05,
                                            double cone_half_angle = 0.2) {
  MicrosupportReport rep;
  std::vector<double> m_list;
  for (double m = -cfg.m_floor; m <= 4.0 + 1e-9; m += 4.0) m_list.push_back(m);
  rep.m_list = m_list;

  auto shells = radial_shells(cfg.xi_min_shell, cfg.xi_max);
  auto mis = all_multi_indices(a.nx + a.nxi, cfg.deriv_depth);

  for (const auto& xc : x_centers) {
    // x samples: center plus axis offsets.
    std::vector<std::vector<double>> xs = {xc};
    for (int d = 0; d < a.nx; ++d) {
      auto xp = xc, xm = xc;
      xp[d] += x_radius;
      xm[d] -= x_radius;
      if (a.domain.contains(xp)) xs.push_back(xp);
      if (a.domain.contains(xm)) xs.push_back(xm);
    }
    for (const auto& dir : directions) {
      ConeCell cell;
      cell.x = xc;
      cell.dir = dir;

      // Direction samples inside the cone.
      std::vector<std::vector<double>> ds = {dir};
      if (a.nxi >= 2) {
        for (int sgn : {-1, 1}) {
          std::vector<double> d2(dir);
          double c = std::cos(sgn * cone_half_angle), s = std::sin(sgn * cone_half_angle);
          d2[0] = c * dir[0] - s * dir[1];
          d2[1] = s * dir[0] + c * dir[1];
          ds.push_back(d2);
        }
      }

      // Raw maxima per (eps, shell, mi).
      size_t ne = grid.size(), ns = shells.size(), nk = mis.size();
      std::vector<std::vector<std::vector<double>>> mx(
          ne, std::vector<std::vector<double>>(ns, std::vector<double>(nk, 0.0)));
      std::vector<double> xi(a.nxi);
      for (size_t e = 0; e < ne; ++e)
        for (size_t s = 0; s < ns; ++s)
          for (const auto& d2 : ds) {
            for (int i = 0; i < a.nxi; ++i) xi[i] = shells[s] * d2[i];
            for (const auto& x : xs) {
              Jet j = a.jet_at(grid[e], x, xi, cfg.deriv_depth);
              for (size_t k = 0; k < nk; ++k) {
                double v = std::abs(j.deriv_mi(mis[k]));
                if (v <= cfg.noise_floor) v = 0.0;
                mx[e][s][k] = std::max(mx[e][s][k], v);
              }
            }
          }

      auto alpha_order = [&](size_t k) {
        int o = 0;
        for (int i = a.nx; i < a.nx + a.nxi; ++i) o += mis[k][i];
        return o;
      };
      auto beta_order = [&](size_t k) {
        int o = 0;
        for (int i = 0; i < a.nx; ++i) o += mis[k][i];
        return o;
      };
      auto table_at = [&](double m, size_t e) {
        double sup = 0.0;
        for (size_t s = 0; s < ns; ++s)
          for (size_t k = 0; k < nk; ++k)
            sup = std::max(sup, mx[e][s][k] * std::pow(japanese_bracket(shells[s]),
                                                       -m + a.rho * alpha_order(k) -
                                                           a.delta * beta_order(k)));
        return sup;
      };

      if (mode == MicroMode::ConeSupp) {
        bool all_neg = true;
        std::vector<double> worst_table(ne, 0.0);
        for (size_t e = 0; e < ne; ++e) worst_table[e] = table_at(a.order, e);
        NetClass nc = classify_net(worst_table, grid, cfg.net);
        cell.evidence = nc.evidence;
        all_neg = nc.kind == NetKind::Negligible;
        cell.tag = all_neg ? CellTag::Out : CellTag::In;
      } else if (mode == MicroMode::G) {
        // xi-decay beyond every tested order, with moderate constants.
        bool out = true;
        for (size_t k = 0; k < nk && out; ++k) {
          std::vector<double> lr, lv;
          std::vector<double> net(ne);
          double biggest = 0.0;
          for (size_t e = 0; e < ne; ++e) {
            double sup = 0.0;
            for (size_t s = 0; s < ns; ++s) sup = std::max(sup, mx[e][s][k]);
            net[e] = sup;
            biggest = std::max(biggest, sup);
          }
          if (biggest == 0.0) continue;  // identically zero derivative row
          for (size_t s = 0; s < ns; ++s) {
            double worst = 0.0;
            for (size_t e = 0; e < ne; ++e) worst = std::max(worst, mx[e][s][k]);
            lr.push_back(std::log(japanese_bracket(shells[s])));
            lv.push_back(std::log(std::max(worst, kLogFloor)));
          }
          double slope = detail::least_squares(lr, lv).slope;
          NetClass nc = classify_net(net, grid, cfg.net);
          cell.evidence = nc.evidence;
          out = slope <= -(cfg.m_floor - 0.5) && nc.kind != NetKind::NotModerate;
          if (nc.kind == NetKind::Negligible) out = true;
        }
        cell.tag = out ? CellTag::Out : CellTag::In;
      } else {
        // Joint-N fit across the order list.
        double n_min = std::numeric_limits<double>::infinity(), n_max = 0.0;
        bool moderate = true;
        for (double m : m_list) {
          std::vector<double> net(ne);
          for (size_t e = 0; e < ne; ++e) net[e] = table_at(m, e);
          NetClass nc = classify_net(net, grid, cfg.net);
          cell.evidence = nc.evidence;
          if (nc.kind == NetKind::NotModerate) moderate = false;
          double nhat = nc.kind == NetKind::Negligible ? 0.0 : nc.N;
          n_min = std::min(n_min, nhat);
          n_max = std::max(n_max, nhat);
        }
        cell.tag = (moderate && n_max - n_min <= 1.0 + 1e-9) ? CellTag::Out : CellTag::In;
      }
      rep.region.cells.push_back(std::move(cell));
    }
  }
  return rep;
}

}  // namespace oscintlab
