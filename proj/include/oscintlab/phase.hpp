#pragma once

// Generalized phase functions: real-valued nets, positively homogeneous of
// degree 1 in the frequency variables, with strictly nonzero gradient
// nondegeneracy. Provides the first-order operator L with ^tL e^{i phi} =
// e^{i phi}, built from the standard coefficient shape
//   a_j = i chi |xi|^2 (d_{xi_j} phi) / M,   b_k = i chi (d_{y_k} phi) / M,
//   c   = 1 - chi + sum_j d_{xi_j} a_j + sum_k d_{y_k} b_k,
// with M = |grad_y phi|^2 + |xi|^2 |grad_xi phi|^2 and a radial cutoff chi
// vanishing for |xi| <= 1/2. The identity then holds exactly on xi != 0 and
// every coefficient is smooth across xi = 0.

#include "symbols.hpp"

namespace oscintlab {

enum class GradBlock { YXi, XXi };

struct MarginReport {
  std::vector<double> margins;  // per eps: min over lattice of |grad phi(.,xi^)|^2
  NonzeroVerdict power;
  NonzeroVerdict slow_scale;
};

struct PhaseNet {
  // core variables: (x-parameters | y) then xi. Declared order 1,
  // homogeneous, type (1,0), real-valued.
  SymbolNet core;
  int n_param = 0;
  int ny = 1;
  int np = 1;

  bool with_param() const { return n_param > 0; }

  void check_shape() const {
    if (core.nx != n_param + ny || core.nxi != np)
      throw InvalidInput("PhaseNet: variable layout mismatch");
    if (!core.homogeneous) throw InvalidInput("PhaseNet: core must be homogeneous");
  }

  // Spot checks: real values, degree-1 homogeneity.
  void validate(const EpsGrid& grid) const {
    check_shape();
    auto xs = box_lattice(core.domain, 2);
    auto dirs = sphere_directions(np, 8);
    for (double eps : {grid.values.front(), grid.values.back()}) {
      for (const auto& x : xs) {
        for (const auto& d : dirs) {
          std::vector<double> xi(d.begin(), d.end());
          Cplx v = core.value_at(eps, x, xi);
          if (std::abs(v.imag()) > 1e-12 * (1.0 + std::abs(v)))
            throw InvalidInput("PhaseNet: phase has a nonreal value");
          for (double t : {2.0, 5.0}) {
            std::vector<double> txi(xi);
            for (double& c : txi) c *= t;
            Cplx vt = core.value_at(eps, x, txi);
            if (std::abs(vt - t * v) > 1e-8 * t * (1.0 + std::abs(v)))
              throw InvalidInput("PhaseNet: phase is not degree-1 homogeneous");
          }
        }
      }
    }
  }

  // Binds the leading parameters, producing a parameter-free phase.
  PhaseNet slice(std::span<const double> x0) const {
    if (static_cast<int>(x0.size()) != n_param) throw InvalidInput("PhaseNet::slice: bad size");
    PhaseNet out = *this;
    out.n_param = 0;
    out.core.nx = ny;
    Box d = core.domain;
    d.lo.erase(d.lo.begin(), d.lo.begin() + n_param);
    d.hi.erase(d.hi.begin(), d.hi.begin() + n_param);
    out.core.domain = d;
    GenericFn base = core.fn;
    std::vector<double> fixed(x0.begin(), x0.end());
    out.core.fn.arity = ny + np;
    out.core.fn.val = [base, fixed](double eps, std::span<const Cplx> args) {
      std::vector<Cplx> all(fixed.begin(), fixed.end());
      all.insert(all.end(), args.begin(), args.end());
      return base.val(eps, all);
    };
    out.core.fn.jet = [base, fixed](double eps, std::span<const Jet> args) {
      std::vector<Jet> all;
      all.reserve(fixed.size() + args.size());
      for (double c : fixed) all.push_back(Jet::constant(args[0].space(), c));
      all.insert(all.end(), args.begin(), args.end());
      return base.jet(eps, all);
    };
    return out;
  }
};

template <class F>
PhaseNet make_phase(int n_param, int ny, int np, Box domain, F f, std::string label = "") {
  PhaseNet p;
  p.n_param = n_param;
  p.ny = ny;
  p.np = np;
  p.core = make_symbol(n_param + ny, np, 1.0, std::move(domain), f, std::move(label), 1.0, 0.0,
                       /*homogeneous=*/true);
  p.check_shape();
  return p;
}

// Minimum over the scan lattice of |grad_block phi(., xi/|xi|)|^2, per eps,
// with strictly-nonzero verdicts in both modes.
inline MarginReport nondegeneracy_margin(const PhaseNet& phi, const Box& K, const EpsGrid& grid,
                                         GradBlock which, const ScanConfig& cfg = {}) {
  if (!phi.core.domain.contains_box(K))
    throw InvalidInput("nondegeneracy_margin: box outside phase domain");
  phi.check_shape();
  auto xs = box_lattice(K, std::max(cfg.x_per_axis, 3));
  auto dirs = sphere_directions(phi.np, cfg.sphere_count);

  // Variable indices of the requested gradient block.
  std::vector<int> vars;
  if (which == GradBlock::YXi) {
    for (int i = 0; i < phi.ny; ++i) vars.push_back(phi.n_param + i);
  } else {
    if (!phi.with_param())
      throw InvalidInput("nondegeneracy_margin: x_xi block needs a parametric phase");
    for (int i = 0; i < phi.n_param; ++i) vars.push_back(i);
  }
  for (int i = 0; i < phi.np; ++i) vars.push_back(phi.n_param + phi.ny + i);

  MarginReport rep;
  rep.margins.resize(grid.size());
  for (size_t e = 0; e < grid.size(); ++e) {
    double eps = grid[e];
    double mn = std::numeric_limits<double>::infinity();
    for (const auto& x : xs) {
      for (const auto& d : dirs) {
        Jet j = phi.core.jet_at(eps, x, d, 1);
        double g2 = 0.0;
        for (int v : vars) {
          MultiIndex mi(phi.core.nx + phi.core.nxi, 0);
          mi[v] = 1;
          g2 += std::norm(j.deriv_mi(mi));
        }
        mn = std::min(mn, g2);
      }
    }
    rep.margins[e] = mn;
  }
  rep.power = is_strictly_nonzero(rep.margins, grid, NonzeroMode::Power, cfg.net);
  rep.slow_scale = is_strictly_nonzero(rep.margins, grid, NonzeroMode::SlowScale, cfg.net);
  return rep;
}

// ---------------------------------------------------------------------------
// The operator L_phi
// ---------------------------------------------------------------------------

using JetProvider = std::function<Jet(double eps, std::span<const double> pt, int order)>;

struct OscOperator {
  PhaseNet phase;
  MarginReport margin;  // yxi margins on the calibration box

  struct Coeffs {
    std::vector<Jet> a;  // np entries, order-0 symbols
    std::vector<Jet> b;  // ny entries, order -1
    Jet c;               // order -1
  };

  // Jets of all coefficients at a point (full variable list, including any
  // parameters), in the space of order q. a and b are valid to order q, c to
  // order q-1; the phase is evaluated two orders higher internally.
  Coeffs coeffs_at(double eps, std::span<const double> pt, int q) const {
    const int nv = phase.core.nx + phase.core.nxi;
    const int ybase = phase.n_param, xibase = phase.n_param + phase.ny;
    const JetSpace& s = JetSpace::get(nv, q);
    const JetSpace& hi = JetSpace::get(nv, q + 2);
    std::vector<Jet> args;
    args.reserve(nv);
    for (int i = 0; i < nv; ++i) args.push_back(Jet::variable(hi, i, pt[i]));
    Jet f = phase.core.fn.jet(eps, args);

    std::vector<Jet> xi;
    for (int j = 0; j < phase.np; ++j) xi.push_back(Jet::variable(s, xibase + j, pt[xibase + j]));
    Jet r2 = norm_sq(std::span<const Jet>(xi));
    Jet chi = smooth_ramp(r2, 0.25, 1.0);

    Jet M = Jet::constant(s, 0.0);
    std::vector<Jet> dy, dxi;
    for (int k = 0; k < phase.ny; ++k) {
      dy.push_back(f.derivative(ybase + k).project(s));
      M += dy.back() * dy.back();
    }
    for (int j = 0; j < phase.np; ++j) {
      dxi.push_back(f.derivative(xibase + j).project(s));
      M += r2 * (dxi.back() * dxi.back());
    }

    Coeffs out{std::vector<Jet>(), std::vector<Jet>(), Jet(s)};
    const Cplx I(0, 1);
    std::vector<double> xi_pt(pt.begin() + xibase, pt.begin() + xibase + phase.np);
    bool dead = branch_value(chi) == 0.0 && norm2(xi_pt) < 0.5;
    Jet invM = dead ? Jet::constant(s, 0.0) : recip(M);
    for (int j = 0; j < phase.np; ++j) out.a.push_back(I * chi * r2 * dxi[j] * invM);
    for (int k = 0; k < phase.ny; ++k) out.b.push_back(I * chi * dy[k] * invM);
    out.c = 1.0 - chi;
    for (int j = 0; j < phase.np; ++j) out.c += out.a[j].derivative(xibase + j);
    for (int k = 0; k < phase.ny; ++k) out.c += out.b[k].derivative(ybase + k);
    return out;
  }

  // Value of L^k(amp) at a point; amp supplies jets of the amplitude
  // (typically a(y,xi) u(y), with parameters bound). Validity flows down one
  // degree per application, so products are truncated to the degree that is
  // still meaningful.
  Cplx apply_k(double eps, std::span<const double> pt, int k, const JetProvider& amp,
               int pad = 0) const {
    if (k == 0) return amp(eps, pt, 0).value();
    Coeffs co = coeffs_at(eps, pt, k + pad);
    Jet g = amp(eps, pt, k + pad);
    const int ybase = phase.n_param, xibase = phase.n_param + phase.ny;
    for (int pass = 0; pass < k; ++pass) {
      int target = k + pad - 1 - pass;
      Jet next = co.c.mul_to(g, target);
      for (int j = 0; j < phase.np; ++j)
        next += co.a[j].mul_to(g.derivative(xibase + j), target);
      for (int kk = 0; kk < phase.ny; ++kk)
        next += co.b[kk].mul_to(g.derivative(ybase + kk), target);
      g = next;
    }
    return g.value();
  }

  // | ^tL e^{i phi} - e^{i phi} | at a point. ^tL v = -sum d_xi(a_j v)
  // - sum d_y(b_k v) + c v.
  double transpose_residual(double eps, std::span<const double> pt) const {
    const int nv = phase.core.nx + phase.core.nxi;
    const int ybase = phase.n_param, xibase = phase.n_param + phase.ny;
    const JetSpace& s = JetSpace::get(nv, 2);
    std::vector<Jet> args;
    for (int i = 0; i < nv; ++i) args.push_back(Jet::variable(s, i, pt[i]));
    Jet f = phase.core.fn.jet(eps, args);
    Jet v = exp(Cplx(0, 1) * f);
    Coeffs co = coeffs_at(eps, pt, 2);
    Jet res = co.c * v;
    for (int j = 0; j < phase.np; ++j) res -= (co.a[j] * v).derivative(xibase + j);
    for (int k = 0; k < phase.ny; ++k) res -= (co.b[k] * v).derivative(ybase + k);
    res -= v;
    return std::abs(res.value());
  }

  // Coefficient as an order-checkable SymbolNet. which: 0 = a_j, 1 = b_k,
  // 2 = c. The wrapper re-seeds at the argument point, so it supports every
  // scan path (seeded-variable arguments).
  SymbolNet coeff_symbol(int which, int index = 0) const {
    SymbolNet s = phase.core;
    s.order = which == 0 ? 0.0 : -1.0;
    s.label = (which == 0 ? "L.a" : which == 1 ? "L.b" : "L.c") + std::to_string(index);
    s.homogeneous = false;
    OscOperator self = *this;
    s.fn.arity = phase.core.fn.arity;
    s.fn.val = [self, which, index](double eps, std::span<const Cplx> cargs) -> Cplx {
      std::vector<double> pt(cargs.size());
      for (size_t i = 0; i < cargs.size(); ++i) pt[i] = cargs[i].real();
      // c is valid one order below the request; ask one higher for values.
      Coeffs co = self.coeffs_at(eps, pt, 1);
      return which == 0 ? co.a[index].value() : which == 1 ? co.b[index].value() : co.c.value();
    };
    s.fn.jet = [self, which, index](double eps, std::span<const Jet> jargs) -> Jet {
      const JetSpace& sp = jargs[0].space();
      std::vector<double> pt(jargs.size());
      for (size_t i = 0; i < jargs.size(); ++i) pt[i] = jargs[i].value().real();
      Coeffs co = self.coeffs_at(eps, pt, sp.order() + 1);
      const Jet& src = which == 0 ? co.a[index] : which == 1 ? co.b[index] : co.c;
      Jet out(sp);
      for (int i = 0; i < sp.size(); ++i) {
        MultiIndex e(sp.dim());
        for (int v = 0; v < sp.dim(); ++v) e[v] = sp.exponent(i)[v];
        out.coeff(i) = src.coeff_mi(e);
      }
      return out;
    };
    return s;
  }
};

// L_phi applied to a symbol, as a symbol: L a = sum a_j d_{xi_j} a +
// sum b_k d_{y_k} a + c a. Lowers the order by s = min(rho, 1 - delta).
inline SymbolNet apply_L_symbol(const OscOperator& op, const SymbolNet& a) {
  SymbolNet out = a;
  double s = std::min(a.rho, 1.0 - a.delta);
  out.order = a.order - s;
  out.label = "L(" + a.label + ")";
  OscOperator self = op;
  SymbolNet base = a;
  const int ybase = op.phase.n_param, xibase = op.phase.n_param + op.phase.ny;
  const int np = op.phase.np, ny = op.phase.ny;
  auto eval_jet = [self, base, ybase, xibase, np, ny](double eps, std::span<const double> pt,
                                                      int order) -> Jet {
    OscOperator::Coeffs co = self.coeffs_at(eps, pt, order + 1);
    const JetSpace& hi = JetSpace::get(base.nx + base.nxi, order + 1);
    std::vector<double> x(pt.begin(), pt.begin() + base.nx);
    std::vector<double> xi(pt.begin() + base.nx, pt.end());
    Jet ja = base.jet_at(eps, x, xi, order + 1);
    Jet res = co.c.mul_to(ja.project(co.c.space()), order);
    for (int j = 0; j < np; ++j) res += co.a[j].mul_to(ja.derivative(xibase + j).project(co.c.space()), order);
    for (int k = 0; k < ny; ++k) res += co.b[k].mul_to(ja.derivative(ybase + k).project(co.c.space()), order);
    return res;
  };
  out.fn.arity = a.fn.arity;
  out.fn.val = [eval_jet](double eps, std::span<const Cplx> args) -> Cplx {
    std::vector<double> pt(args.size());
    for (size_t i = 0; i < args.size(); ++i) pt[i] = args[i].real();
    return eval_jet(eps, pt, 0).value();
  };
  out.fn.jet = [eval_jet](double eps, std::span<const Jet> args) -> Jet {
    const JetSpace& sp = args[0].space();
    std::vector<double> pt(args.size());
    for (size_t i = 0; i < args.size(); ++i) pt[i] = args[i].value().real();
    return eval_jet(eps, pt, sp.order()).project(sp);
  };
  return out;
}

// Requires power-strict nonzero yxi nondegeneracy on the phase's domain box.
inline OscOperator build_Lphi(const PhaseNet& phi, const EpsGrid& grid, const ScanConfig& cfg = {}) {
  phi.check_shape();
  Box K = phi.core.domain;
  MarginReport rep = nondegeneracy_margin(phi, K, grid, GradBlock::YXi, cfg);
  if (!rep.power.strictly_nonzero)
    throw PreconditionError("build_Lphi: phase is degenerate on its domain box (" +
                            phi.core.label + ")");
  OscOperator op;
  op.phase = phi;
  op.margin = rep;
  return op;
}

// e^{i phi} as a symbol of order 1 and type (0,1) (fully composable: the
// exponential is taken inside the generic program).
inline SymbolNet exp_phase_symbol(const PhaseNet& phi) {
  SymbolNet s = phi.core;
  s.order = 1.0;
  s.rho = 1e-9;  // type (0,1) scale; rho must stay positive
  s.delta = 1.0 - 1e-9;
  s.label = "exp(i*" + phi.core.label + ")";
  GenericFn base = phi.core.fn;
  s.fn.arity = base.arity;
  s.fn.val = [base](double eps, std::span<const Cplx> args) {
    return std::exp(Cplx(0, 1) * base.val(eps, args));
  };
  s.fn.jet = [base](double eps, std::span<const Jet> args) {
    return exp(Cplx(0, 1) * base.jet(eps, args));
  };
  return s;
}

struct ExpPhaseOrderReport {
  SeminormTable table;  // (0,1)-scale seminorms at order 1
  NetClass cls;
};

// Seminorm tables of e^{i phi} in the (rho, delta) = (0,1) scale at order 1,
// classified over eps.
inline ExpPhaseOrderReport exp_phase_orders(const PhaseNet& phi, const EpsGrid& grid, int depth = 3,
                                            const ScanConfig& cfg = {}) {
  SymbolNet e = exp_phase_symbol(phi);
  ScanConfig c = cfg;
  c.deriv_depth = depth;
  ExpPhaseOrderReport rep{seminorm(e, phi.core.domain, depth, 1.0, 0.0, 1.0, grid, c), {}};
  rep.cls = classify_net(rep.table.values, grid, cfg.net);
  return rep;
}

}  // namespace oscintlab
