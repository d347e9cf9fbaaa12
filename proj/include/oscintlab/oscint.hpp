#pragma once

// Oscillatory integrals I_phi(a)(u) and parametric Fourier integral
// operators. The regularized integrand e^{i phi} L^k(a u) is integrated over
// supp u x {|xi| <= Xi} with dbar-xi = (2 pi)^{-p} d xi. The radial
// truncation starts at xi_start and is extended adaptively (doubling) until
// the outermost shell contributes below tolerance; the analytic tail bound
// from the post-regularization order is reported alongside.
//
// Two evaluation routes compute the same number:
//   - defk: the k-fold integration-by-parts integrand, k explicit or chosen
//     as ceil((m + 1 + p + 2)/s).
//   - direct: plain a*u integrand, eligible when the y-integral itself
//     decays fast enough in |xi| (measured on probe shells). Used by the
//     auto mode when the phase margin makes the defk route ill-conditioned:
//     its coefficients carry margin^{-1} factors, so k applications amplify
//     roundoff by margin^{-k}.
// The k-independence property (values for admissible k agree) is what makes
// the choice a numerical one.

#include <map>
#include <unordered_map>

#include "phase.hpp"

namespace oscintlab {

// ---------------------------------------------------------------------------
// GFunc: a net of compactly supported grid functions.
// ---------------------------------------------------------------------------

struct GFunc {
  int dim = 1;
  Box grid_box;     // periodization box (padded around the support)
  int n = 512;      // grid points per axis, power of two
  Box support_box;  // values vanish outside
  GenericFn fn;     // (eps, y) -> value
  bool analytic = true;
  std::string label;

  double spacing() const { return (grid_box.hi[0] - grid_box.lo[0]) / n; }
  double band_limit() const { return kPi / spacing(); }

  Cplx value_at(double eps, std::span<const double> y) const {
    std::vector<Cplx> args(y.begin(), y.end());
    return fn.val(eps, args);
  }

  // Jet in the y-variables embedded into an ambient space: the first
  // `offset` ambient variables are not y (e.g. xi slots), y occupies
  // [offset, offset+dim).
  Jet jet_embedded(double eps, std::span<const double> y, const JetSpace& space, int offset) const {
    if (!analytic) throw EvaluationError("GFunc: sampled-only input needs analytic jets here");
    std::vector<Jet> args;
    for (int i = 0; i < dim; ++i) args.push_back(Jet::variable(space, offset + i, y[i]));
    return fn.jet(eps, args);
  }

  std::vector<Cplx> sample(double eps) const {
    int total = 1;
    for (int d = 0; d < dim; ++d) total *= n;
    std::vector<Cplx> out(total);
    std::vector<double> y(dim);
    for (int idx = 0; idx < total; ++idx) {
      int rem = idx;
      for (int d = dim - 1; d >= 0; --d) {
        int i = rem % n;
        rem /= n;
        y[d] = grid_box.lo[d] + (grid_box.hi[d] - grid_box.lo[d]) * i / n;
      }
      out[idx] = value_at(eps, y);
    }
    return out;
  }

  // Support invariant: |u| <= 1e-12 * max outside the support box.
  void check_support(double eps) const {
    double mx = 0.0, worst = 0.0;
    auto pts = box_lattice(grid_box, 33);
    for (const auto& y : pts) {
      double v = std::abs(value_at(eps, y));
      mx = std::max(mx, v);
      if (!support_box.contains(y)) worst = std::max(worst, v);
    }
    if (worst > 1e-12 * std::max(mx, 1e-30))
      throw InvalidInput("GFunc: values do not vanish outside the declared support box");
  }
};

template <class F>
GFunc make_gfunc(int dim, Box grid_box, int n, Box support, F f, std::string label = "") {
  GFunc g;
  g.dim = dim;
  g.grid_box = std::move(grid_box);
  g.n = n;
  g.support_box = std::move(support);
  g.fn = erase_fn(dim, f);
  g.label = std::move(label);
  return g;
}

inline SymbolNet slice_symbol(const SymbolNet& a, std::span<const double> x0, int n_param) {
  SymbolNet out = a;
  out.nx = a.nx - n_param;
  Box d = a.domain;
  d.lo.erase(d.lo.begin(), d.lo.begin() + n_param);
  d.hi.erase(d.hi.begin(), d.hi.begin() + n_param);
  out.domain = d;
  GenericFn base = a.fn;
  std::vector<double> fixed(x0.begin(), x0.end());
  out.fn.arity = a.fn.arity - n_param;
  out.fn.val = [base, fixed](double eps, std::span<const Cplx> args) {
    std::vector<Cplx> all(fixed.begin(), fixed.end());
    all.insert(all.end(), args.begin(), args.end());
    return base.val(eps, all);
  };
  out.fn.jet = [base, fixed](double eps, std::span<const Jet> args) {
    std::vector<Jet> all;
    all.reserve(fixed.size() + args.size());
    for (double c : fixed) all.push_back(Jet::constant(args[0].space(), c));
    all.insert(all.end(), args.begin(), args.end());
    return base.jet(eps, all);
  };
  return out;
}

// ---------------------------------------------------------------------------
// Options / results
// ---------------------------------------------------------------------------

struct OscOptions {
  double xi_start = 256.0;  // initial radial truncation
  double xi_cap = 1.0e9;    // adaptive extension cap
  double rel_tol = 1e-8;
  double abs_tol = 1e-14;
  int sphere_count = 32;   // directions when p = 2
  int max_k = 12;
  double margin_floor = 5e-2;  // defk conditioning gate for the auto route
  int min_y_points = 48;
  int max_y_points = 1 << 14;
  double oversample = 1.5;
};

struct OscDiagnostics {
  int k_used = 0;        // L-applications in the evaluated integrand
  int k_def = 0;         // Definition-level admissible k
  double xi_used = 0.0;  // realized truncation
  double tail_estimate = 0.0;
  long integrand_evals = 0;
  int y_points = 0;
  bool route_direct = false;
};

struct OscResult {
  GeneralizedNumber value;
  std::vector<OscDiagnostics> diag;  // per eps
};

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

namespace detail {

// Composite Simpson with recursive bisection on [a,b].
template <class F>
Cplx adaptive_simpson(const F& f, double a, double b, double tol, int depth, Cplx fa, Cplx fm,
                      Cplx fb) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  Cplx flm = f(lm), frm = f(rm);
  Cplx whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  Cplx left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  Cplx right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  Cplx delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, tol * 0.5, depth - 1, fa, flm, fm) +
         adaptive_simpson(f, m, b, tol * 0.5, depth - 1, fm, frm, fb);
}

template <class F>
Cplx integrate_panelled(const F& f, double a, double b, int base_panels, double tol) {
  base_panels = std::max(base_panels, 2);
  Cplx total(0, 0);
  double h = (b - a) / base_panels;
  for (int i = 0; i < base_panels; ++i) {
    double x0 = a + i * h, x1 = x0 + h;
    Cplx f0 = f(x0), fm = f(0.5 * (x0 + x1)), f1 = f(x1);
    total += adaptive_simpson(f, x0, x1, tol / base_panels, 6, f0, fm, f1);
  }
  return total;
}

}  // namespace detail

class OscIntegrator {
 public:
  // phi: parameter-free phase on (y, xi); a: symbol with nx = ny; u: GFunc.
  OscIntegrator(const PhaseNet& phi, const SymbolNet& a, const GFunc& u, const EpsGrid& grid,
                OscOptions opt = {}, const ScanConfig& scan = {})
      : phi_(phi), a_(a), u_(u), grid_(grid), opt_(opt) {
    if (phi.with_param()) throw InvalidInput("OscIntegrator: phase must be parameter-free");
    if (phi.ny != u.dim || a.nx != u.dim || a.nxi != phi.np)
      throw InvalidInput("OscIntegrator: dimension mismatch");
    op_ = build_Lphi(phi, grid, scan);
    s_gain_ = std::min(a.rho, 1.0 - a.delta);
    k_def_ = static_cast<int>(std::ceil((a.order + 1.0 + phi.np + 2.0) / s_gain_));
    k_def_ = std::clamp(k_def_, 1, opt_.max_k);
  }

  int default_k() const { return k_def_; }
  const OscOperator& op() const { return op_; }

  // k < 0 requests the auto route: direct quadrature when the plain
  // integrand verifiably decays (the two routes agree by k-independence),
  // the Definition-level k otherwise.
  std::pair<Cplx, OscDiagnostics> evaluate(size_t eps_index, int k) {
    double eps = grid_[eps_index];
    OscDiagnostics d;
    d.k_def = k_def_;
    bool route_direct = false;
    int k_used = k;
    if (k < 0) {
      k_used = k_def_;
      if (direct_route_decays(eps)) {
        route_direct = true;
        k_used = 0;
      }
    } else if (k * s_gain_ < a_.order + 1.0 + phi_.np) {
      throw PreconditionError("osc_integral: k too small for the amplitude order");
    }
    // Sampled inputs are bound by their declared grid resolution.
    if (!u_.analytic && shell_bounds(eps).y_grad * opt_.xi_start > 0.95 * u_.band_limit())
      throw InvalidInput("osc_integral: Nyquist violation, grid cannot resolve the phase band");
    d.k_used = k_used;
    d.route_direct = route_direct;
    Cplx v = integrate(eps, route_direct ? 0 : k_used, route_direct, &d);
    return {v, d};
  }

 private:
  // Per-eps gradient bounds on the unit shell; by degree-1 homogeneity the
  // y-gradient at radius r is bounded by r * C_y and the xi-gradient stays
  // at C_xi.
  struct ShellBounds {
    double y_grad = 1.0;
    double xi_grad = 1.0;
  };
  ShellBounds shell_bounds(double eps) {
    auto it = bounds_cache_.find(eps);
    if (it != bounds_cache_.end()) return it->second;
    ShellBounds b{0.0, 0.0};
    auto dirs = sphere_directions(phi_.np, std::min(16, opt_.sphere_count));
    auto ys = box_lattice(u_.support_box, 3);
    for (const auto& dir : dirs) {
      for (const auto& y : ys) {
        Jet j = phi_.core.jet_at(eps, y, dir, 1);
        double gy = 0.0, gxi = 0.0;
        for (int v = 0; v < phi_.ny + phi_.np; ++v) {
          MultiIndex mi(phi_.ny + phi_.np, 0);
          mi[v] = 1;
          double t = std::norm(j.deriv_mi(mi));
          (v < phi_.ny ? gy : gxi) += t;
        }
        b.y_grad = std::max(b.y_grad, std::sqrt(gy));
        b.xi_grad = std::max(b.xi_grad, std::sqrt(gxi));
      }
    }
    bounds_cache_[eps] = b;
    return b;
  }

  double support_width() const {
    double width = 0.0;
    for (int d = 0; d < u_.dim; ++d)
      width = std::max(width, u_.support_box.hi[d] - u_.support_box.lo[d]);
    return width;
  }

  // Largest radius whose y-oscillation the quadrature budget can resolve.
  double resolvable_radius(double eps) {
    double freq_cap = 0.9 * kPi * opt_.max_y_points / (support_width() * opt_.oversample);
    return std::max(freq_cap / std::max(shell_bounds(eps).y_grad, 1e-12), 2.0 * opt_.xi_start);
  }

  // Probes the plain y-integral on growing shells; eligible when its decay
  // faster than |xi|^{-(p + 1.5)} becomes visible at some reachable radius
  // (eps-dependent phases may only start decaying at radius ~ 1/eps).
  bool direct_route_decays(double eps) {
    auto it = probe_cache_.find(eps);
    if (it != probe_cache_.end()) return it->second;
    auto dirs = sphere_directions(phi_.np, std::min(8, opt_.sphere_count));
    auto probe = [&](double r) {
      double worst = 0.0;
      for (const auto& dir : dirs) {
        std::vector<double> xi(dir);
        for (double& c : xi) c *= r;
        worst = std::max(worst, std::abs(y_integral(eps, xi, 0, Piece::Direct, nullptr)));
      }
      return worst;
    };
    std::vector<double> lr, lv;
    double peak = 0.0;
    int floor_hits = 0;
    bool ok = false;
    double r_max = std::min(opt_.xi_cap, resolvable_radius(eps));
    for (double r = 0.25 * opt_.xi_start; r <= r_max && !ok; r *= 2.0) {
      double w = probe(r);
      peak = std::max(peak, w);
      lr.push_back(std::log(r));
      lv.push_back(std::log(std::max(w, 1e-280)));
      if (w <= std::max(opt_.abs_tol, 1e-11 * peak)) {
        if (++floor_hits >= 2) ok = true;
      } else {
        floor_hits = 0;
      }
      if (!ok && lr.size() >= 3) {
        size_t n = lr.size();
        double slope = detail::least_squares(std::span(lr).subspan(n - 3),
                                             std::span(lv).subspan(n - 3))
                           .slope;
        if (slope <= -(phi_.np + 1.5) && lv[n - 1] < std::log(std::max(peak, 1e-280)) - 2.0)
          ok = true;
      }
    }
    probe_cache_[eps] = ok;
    return ok;
  }

  int y_points_for(double freq) const {
    double width = 0.0;
    for (int d = 0; d < u_.dim; ++d)
      width = std::max(width, u_.support_box.hi[d] - u_.support_box.lo[d]);
    int n = static_cast<int>(std::ceil(freq * width / kPi * opt_.oversample)) + opt_.min_y_points;
    return std::min(n, opt_.max_y_points);
  }

  // Integrand selection. The defk route partitions the amplitude radially:
  //   a u = (1 - chi2) a u + chi2 a u,   chi2 ramping 0 -> 1 over |xi| in
  // [1, 8]. The complement piece has compact xi-support and integrates
  // plainly; L^k falls on the chi2 piece only. This keeps the |xi|-cutoff
  // derivatives out of the k-fold products: differentiating a ramp k times
  // costs a factor ~ (c k / width)^k, which for the narrow operator cutoff
  // produces enormous canceling structure that plain quadrature cannot
  // afford to resolve.
  enum class Piece { Direct, OuterL, InnerComplement };
  static constexpr double kSplitLo = 1.0, kSplitHi = 8.0;

  // Trapezoid y-integral of e^{i phi} F over the support box. u vanishes at
  // the boundary, so the rule is spectrally accurate. 1D and 2D.
  Cplx y_integral(double eps, std::span<const double> xi, int k, Piece piece,
                  OscDiagnostics* d) {
    double freq = shell_bounds(eps).y_grad * std::max(norm2(xi), 1.0);
    int ny = y_points_for(freq);
    if (d) d->y_points = std::max(d->y_points, ny);

    const int dim = u_.dim;
    std::vector<double> lo(u_.support_box.lo), hi(u_.support_box.hi);
    std::vector<double> h(dim);
    for (int t = 0; t < dim; ++t) h[t] = (hi[t] - lo[t]) / ny;

    Cplx total(0, 0);
    std::vector<double> y(dim);
    std::vector<int> idx(dim, 0);
    // Reused argument buffers keep the hot loop allocation-free.
    std::vector<Cplx> yx_args(dim + a_.nxi), y_args(dim);
    for (int t = 0; t < a_.nxi; ++t) yx_args[dim + t] = xi[t];
    double cut_inner = 1.0;
    if (piece == Piece::InnerComplement) {
      cut_inner = 1.0 - chi2_value(norm2(xi));
      if (cut_inner == 0.0) return Cplx(0, 0);
    }
    if (piece == Piece::OuterL && norm2(xi) <= kSplitLo * (1.0 + 1e-12)) return Cplx(0, 0);
    long count = 1;
    for (int t = 0; t < dim; ++t) count *= (ny + 1);
    for (long c = 0; c < count; ++c) {
      long rem = c;
      double w = 1.0;
      for (int t = dim - 1; t >= 0; --t) {
        idx[t] = rem % (ny + 1);
        rem /= (ny + 1);
        y[t] = lo[t] + idx[t] * h[t];
        w *= (idx[t] == 0 || idx[t] == ny) ? 0.5 * h[t] : h[t];
      }
      Cplx f;
      if (piece != Piece::OuterL) {
        for (int t = 0; t < dim; ++t) yx_args[t] = y_args[t] = y[t];
        f = cut_inner * a_.fn.val(eps, yx_args) * u_.fn.val(eps, y_args);
        Cplx ph = phi_.core.fn.val(eps, yx_args);
        total += w * std::exp(Cplx(0, 1) * ph) * f;
        if (d) ++d->integrand_evals;
        continue;
      }
      {
        double r = norm2(xi);
        if (r <= kSplitLo * (1.0 + 1e-12)) {
          f = Cplx(0, 0);
        } else {
          std::vector<double> pt(y.begin(), y.end());
          pt.insert(pt.end(), xi.begin(), xi.end());
          auto amp = [this](double e2, std::span<const double> p, int order) -> Jet {
            std::span<const double> yy(p.data(), u_.dim);
            std::span<const double> xx(p.data() + u_.dim, a_.nxi);
            Jet ja = a_.jet_at(e2, yy, xx, order);
            const JetSpace& s = ja.space();
            std::vector<Jet> xj;
            for (int t = 0; t < a_.nxi; ++t)
              xj.push_back(Jet::variable(s, u_.dim + t, xx[t]));
            Jet chi2 = radial_cutoff(std::span<const Jet>(xj), kSplitLo, kSplitHi);
            return ja * u_jet_cached(e2, yy, s) * chi2;
          };
          f = op_.apply_k(eps, pt, k, amp);
        }
      }
      Cplx ph = phi_.core.value_at(eps, y, xi);
      total += w * std::exp(Cplx(0, 1) * ph) * f;
      if (d) ++d->integrand_evals;
    }
    return total;
  }

  static double chi2_value(double r) {
    Cplx s = smooth_ramp(Cplx(r * r, 0), kSplitLo * kSplitLo, kSplitHi * kSplitHi);
    return s.real();
  }

  // Radial integration with dyadic extension. value = (2 pi)^{-p} *
  // int_0^Xi r^{p-1} (sum over directions) dr, directions summed by
  // trapezoid on the sphere (p = 2) or the two rays (p = 1).
  Cplx integrate(double eps, int k, bool direct, OscDiagnostics* d) {
    const int p = phi_.np;
    auto dirs = sphere_directions(p, opt_.sphere_count);
    double dir_weight = p == 1 ? 1.0 : 2.0 * kPi / dirs.size();

    auto shell_piece = [&](double r, Piece piece) -> Cplx {
      Cplx s(0, 0);
      std::vector<double> xi(p);
      for (const auto& dir : dirs) {
        for (int t = 0; t < p; ++t) xi[t] = r * dir[t];
        s += y_integral(eps, xi, k, piece, d);
      }
      return s * dir_weight * std::pow(r, p - 1);
    };
    Piece outer_piece = direct ? Piece::Direct : Piece::OuterL;
    auto shell = [&](double r) { return shell_piece(r, outer_piece); };

    // xi-direction oscillation scale for paneling (degree-0 homogeneous).
    double xi_freq = shell_bounds(eps).xi_grad;
    int base = static_cast<int>(std::ceil(xi_freq)) + 4;

    // Scale probe fixes the tolerance for the adaptive panels. When the
    // integrand carries strong cancellation (result much smaller than the
    // integrand scale), a second pass re-anchors the tolerance at the value.
    double scale = 0.0;
    for (double r : {0.3, 2.0, 6.0}) scale = std::max(scale, std::abs(shell_piece(r, direct ? Piece::Direct : Piece::InnerComplement)));
    for (double r : {2.0, 6.0, 16.0}) scale = std::max(scale, std::abs(shell(r)));

    Cplx total(0, 0);
    double lo = 1.0, seg_mag = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
      double anchor = pass == 0 ? scale : std::min(scale, 10.0 * std::abs(total));
      double tol = std::max(opt_.abs_tol, 0.02 * opt_.rel_tol * anchor);
      total = Cplx(0, 0);
      if (direct) {
        total += detail::integrate_panelled(shell, 1e-9, 1.0, base, tol);
        lo = 1.0;
      } else {
        // Complement piece: compact xi-support [0, kSplitHi], plain
        // quadrature; then the L^k piece from the split radius outward.
        auto inner = [&](double r) { return shell_piece(r, Piece::InnerComplement); };
        total += detail::integrate_panelled(inner, 1e-9, kSplitHi,
                                            base + static_cast<int>(2 * kSplitHi), tol);
        lo = kSplitLo;
      }
      double running = std::max({scale, std::abs(total), 1e-30});
      seg_mag = 0.0;
      while (true) {
        double hi = 2.0 * lo;
        int panels = static_cast<int>(std::ceil(xi_freq * (hi - lo) / 5.5)) + 4;
        Cplx seg = detail::integrate_panelled(shell, lo, hi, panels, tol);
        total += seg;
        seg_mag = std::abs(seg);
        running = std::max({running, std::abs(total), 1e-30});
        lo = hi;
        if (lo >= opt_.xi_cap || lo >= resolvable_radius(eps)) break;
        if (lo >= opt_.xi_start && seg_mag <= opt_.rel_tol * running) break;
        // Deep convergence well inside the nominal truncation: stop early.
        if (lo >= 32.0 && seg_mag <= 1e-2 * opt_.rel_tol * running) break;
      }
      if (std::abs(total) * 20.0 >= scale) break;  // no material cancellation
    }
    if (d) {
      d->xi_used = lo;
      // Tail bound from the post-regularization decay: the outermost segment
      // repeated geometrically; plus the analytic order bound.
      double decay = direct ? 2.0 : std::max(k * s_gain_ - a_.order - (p - 1), 1.1);
      d->tail_estimate = seg_mag / std::max(std::pow(2.0, decay - 1.0) - 1.0, 0.1) /
                         std::pow(2.0 * kPi, p);
    }
    return total / std::pow(2.0 * kPi, p);
  }

  // u-jets are xi-independent; cache them across the radial sweep.
  const Jet& u_jet_cached(double eps, std::span<const double> y, const JetSpace& space) {
    uint64_t h = std::hash<double>()(eps) ^ (static_cast<uint64_t>(space.order()) << 1);
    for (double c : y) h = h * 1099511628211ULL + std::hash<double>()(c);
    auto it = ujet_cache_.find(h);
    if (it != ujet_cache_.end()) return it->second;
    return ujet_cache_.emplace(h, u_.jet_embedded(eps, y, space, 0)).first->second;
  }

  PhaseNet phi_;
  SymbolNet a_;
  GFunc u_;
  EpsGrid grid_;
  OscOptions opt_;
  OscOperator op_;
  double s_gain_ = 1.0;
  int k_def_ = 1;
  std::map<double, ShellBounds> bounds_cache_;
  std::map<double, bool> probe_cache_;
  std::unordered_map<uint64_t, Jet> ujet_cache_;
};

// k < 0 selects the route automatically (defk when well-conditioned, direct
// when the margin-scaled conditioning would swamp the result and the plain
// integrand decays).
inline OscResult osc_integral(const PhaseNet& phi, const SymbolNet& a, const GFunc& u,
                              const EpsGrid& grid, int k = -1, OscOptions opt = {},
                              const ScanConfig& scan = {}) {
  OscIntegrator eng(phi, a, u, grid, opt, scan);
  std::vector<Cplx> vals(grid.size());
  OscResult out;
  out.diag.resize(grid.size());
  for (size_t e = 0; e < grid.size(); ++e) {
    auto [v, d] = eng.evaluate(e, k);
    vals[e] = v;
    out.diag[e] = d;
  }
  out.value = GeneralizedNumber(grid, std::move(vals));
  return out;
}

// ---------------------------------------------------------------------------
// Parametric FIO application on an x-lattice
// ---------------------------------------------------------------------------

struct FioResult {
  std::vector<std::vector<double>> x_lattice;
  // values[xi][e]: value at x_lattice[xi] for grid eps e
  std::vector<std::vector<Cplx>> values;
  std::vector<OscDiagnostics> diag;  // representative diagnostics per x
  EpsGrid grid;

  std::vector<double> sup_norms() const {
    std::vector<double> out(grid.size(), 0.0);
    for (const auto& row : values)
      for (size_t e = 0; e < row.size(); ++e) out[e] = std::max(out[e], std::abs(row[e]));
    return out;
  }
};

inline FioResult fio_apply(const PhaseNet& phi, const SymbolNet& a, const GFunc& u,
                           const std::vector<std::vector<double>>& x_lattice, const EpsGrid& grid,
                           int k = -1, OscOptions opt = {}, const ScanConfig& scan = {}) {
  if (!phi.with_param()) throw InvalidInput("fio_apply: phase must carry parameters");
  FioResult res;
  res.x_lattice = x_lattice;
  res.grid = grid;
  res.values.resize(x_lattice.size());
  res.diag.resize(x_lattice.size());
  for (size_t xi = 0; xi < x_lattice.size(); ++xi) {
    PhaseNet ph = phi.slice(x_lattice[xi]);
    SymbolNet ax = slice_symbol(a, x_lattice[xi], phi.n_param);
    OscResult r = osc_integral(ph, ax, u, grid, k, opt, scan);
    res.values[xi] = r.value.samples;
    res.diag[xi] = r.diag.back();
  }
  return res;
}

// ---------------------------------------------------------------------------
// Damped-integral oracle: brute-force quadrature of
//   int e^{i phi} e^{-delta |xi|^2} a u  dy dbar-xi
// extrapolated delta -> 0 by a Richardson table over a halving sequence.
// Independent of the L-operator machinery (no integration by parts).
// ---------------------------------------------------------------------------

struct DampedOracleResult {
  Cplx value;
  double error_estimate = 0.0;
  bool inconclusive = false;
  std::vector<Cplx> raw;  // per delta
};

inline DampedOracleResult oracle_damped(const PhaseNet& phi, const SymbolNet& a, const GFunc& u,
                                        double eps, std::vector<double> deltas = {0.2, 0.1, 0.05,
                                                                                  0.025}) {
  if (phi.with_param()) throw InvalidInput("oracle_damped: phase must be parameter-free");
  const int p = phi.np;
  DampedOracleResult out;

  for (double delta : deltas) {
    double xi_max = std::sqrt(std::log(1e12) / delta);
    // Resolution: oscillation in y at xi_max and in xi from the support.
    double ydiam = 0.0;
    for (int t = 0; t < u.dim; ++t) ydiam = std::max(ydiam, u.support_box.hi[t] - u.support_box.lo[t]);
    int nxi = static_cast<int>(std::ceil(xi_max * std::max(ydiam, 2.0) * 3.0));
    nxi = std::min(std::max(nxi, 64), 1 << 13);

    auto dirs = sphere_directions(p, 48);
    double dir_weight = p == 1 ? 1.0 : 2.0 * kPi / dirs.size();
    double dr = xi_max / nxi;

    // y-grid resolving e^{i phi} at |xi| <= xi_max.
    int ny = std::min(1 << 12, std::max(128, static_cast<int>(std::ceil(
                                                  xi_max * ydiam * 0.8))));
    std::vector<double> ylo(u.support_box.lo), yhi(u.support_box.hi);
    const int dim = u.dim;
    std::vector<double> h(dim);
    for (int t = 0; t < dim; ++t) h[t] = (yhi[t] - ylo[t]) / ny;

    Cplx total(0, 0);
    std::vector<double> xi(p), y(dim);
    for (int ri = 0; ri < nxi; ++ri) {
      double r = (ri + 0.5) * dr;
      double damp = std::exp(-delta * r * r) * std::pow(r, p - 1) * dr;
      for (const auto& dirv : dirs) {
        for (int t = 0; t < p; ++t) xi[t] = r * dirv[t];
        // inner y trapezoid
        Cplx acc(0, 0);
        std::vector<int> idx(dim, 0);
        long count = 1;
        for (int t = 0; t < dim; ++t) count *= (ny + 1);
        for (long c = 0; c < count; ++c) {
          long rem = c;
          double w = 1.0;
          for (int t = dim - 1; t >= 0; --t) {
            idx[t] = rem % (ny + 1);
            rem /= (ny + 1);
            y[t] = ylo[t] + idx[t] * h[t];
            w *= (idx[t] == 0 || idx[t] == ny) ? 0.5 * h[t] : h[t];
          }
          Cplx ph = phi.core.value_at(eps, y, xi);
          acc += w * std::exp(Cplx(0, 1) * ph) * a.value_at(eps, y, xi) * u.value_at(eps, y);
        }
        total += acc * damp * dir_weight;
      }
    }
    out.raw.push_back(total / std::pow(2.0 * kPi, p));
  }

  // Richardson table for a halving delta sequence, assuming an expansion in
  // powers of delta.
  std::vector<Cplx> row = out.raw;
  double last_corr = std::numeric_limits<double>::infinity();
  for (size_t level = 1; level < out.raw.size(); ++level) {
    std::vector<Cplx> next(row.size() - 1);
    double f = std::pow(2.0, static_cast<double>(level));
    for (size_t i = 0; i + 1 < row.size(); ++i) next[i] = (f * row[i + 1] - row[i]) / (f - 1.0);
    last_corr = std::abs(next.back() - row.back());
    row = std::move(next);
  }
  out.value = row.back();
  out.error_estimate = last_corr;
  out.inconclusive = last_corr > 1e-3 * std::max(1.0, std::abs(out.value));
  return out;
}

}  // namespace oscintlab
