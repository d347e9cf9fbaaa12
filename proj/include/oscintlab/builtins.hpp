#pragma once

// Built-in phases, symbols and test functions. These are the concrete
// objects the tests, the acceptance suite and the CLI catalogue draw from.
// Every body is a generic functor, so each built-in carries an exact
// derivative oracle through the jet instantiation.

#include "oscint.hpp"

namespace oscintlab {
namespace builtins {

// ---------------------------------------------------------------------------
// Symbols
// ---------------------------------------------------------------------------

inline SymbolNet sym_one(int nx, int nxi, Box domain) {
  return make_symbol(nx, nxi, 0.0, std::move(domain),
                     [](double, auto args) { return make_const(args[0], 1.0); }, "one");
}

// <xi>^m on R^p.
inline SymbolNet sym_bracket_power(int nx, int nxi, double m, Box domain) {
  return make_symbol(
      nx, nxi, m, std::move(domain),
      [m, nx, nxi](double, auto args) {
        using T = std::remove_cvref_t<decltype(args[0])>;
        std::span<const T> xi(args.data() + nx, static_cast<size_t>(nxi));
        return pow(bracket(xi), m);
      },
      "bracket^" + std::to_string(m));
}

// eps^{-a} <xi>^m.
inline SymbolNet sym_eps_bracket(int nx, int nxi, double a, double m, Box domain) {
  SymbolNet s = make_symbol(
      nx, nxi, m, std::move(domain),
      [a, m, nx, nxi](double eps, auto args) {
        using T = std::remove_cvref_t<decltype(args[0])>;
        std::span<const T> xi(args.data() + nx, static_cast<size_t>(nxi));
        return make_const(args[0], Cplx(std::pow(eps, -a), 0)) * pow(bracket(xi), m);
      },
      "eps^-" + std::to_string(a) + "*bracket^" + std::to_string(m));
  return s;
}

// c_eps * <xi>^m for an arbitrary scalar net.
inline SymbolNet sym_net_bracket(int nx, int nxi, std::function<double(double)> c_eps, double m,
                                 Box domain, std::string label = "net*bracket") {
  return make_symbol(
      nx, nxi, m, std::move(domain),
      [c_eps, m, nx, nxi](double eps, auto args) {
        using T = std::remove_cvref_t<decltype(args[0])>;
        std::span<const T> xi(args.data() + nx, static_cast<size_t>(nxi));
        return make_const(args[0], Cplx(c_eps(eps), 0)) * pow(bracket(xi), m);
      },
      std::move(label));
}

inline SymbolNet sym_gaussian_xi(int nx, int nxi, Box domain) {
  return make_symbol(
      nx, nxi, 0.0, std::move(domain),
      [nx, nxi](double, auto args) {
        using T = std::remove_cvref_t<decltype(args[0])>;
        std::span<const T> xi(args.data() + nx, static_cast<size_t>(nxi));
        return exp(-1.0 * norm_sq(xi));
      },
      "exp(-|xi|^2)");
}

// First frequency coordinate (order 1, vanishes on a ray).
inline SymbolNet sym_xi1(int nx, int nxi, Box domain) {
  SymbolNet s = make_symbol(
      nx, nxi, 1.0, std::move(domain),
      [nx](double, auto args) { return args[nx]; }, "xi_1");
  return s;
}

// i * xi_1: the differentiation symbol d_{x_1}.
inline SymbolNet sym_i_xi1(int nx, int nxi, Box domain) {
  return make_symbol(
      nx, nxi, 1.0, std::move(domain),
      [nx](double, auto args) { return make_const(args[0], Cplx(0, 1)) * args[nx]; }, "i*xi_1");
}

// Smooth direction cutoff supported in the cone around `axis` with the given
// aperture (cos_inner: value 1; cos_outer: value 0), times <xi>^m. Constant
// in eps. Cut off near the origin so it is a symbol on all of R^p.
inline SymbolNet sym_cone_cutoff(int nx, int nxi, std::vector<double> axis, double cos_inner,
                                 double cos_outer, double m, Box domain) {
  double an = norm2(axis);
  for (double& c : axis) c /= an;
  return make_symbol(
      nx, nxi, m, std::move(domain),
      [axis, cos_inner, cos_outer, m, nx, nxi](double, auto args) {
        using T = std::remove_cvref_t<decltype(args[0])>;
        std::span<const T> xi(args.data() + nx, static_cast<size_t>(nxi));
        T r2 = norm_sq(xi);
        T base = radial_cutoff(xi, 0.5, 1.0);
        if (branch_value(r2) < 0.3) return make_const(args[0], 0.0) * args[0];
        T dot = make_const(args[0], 0.0);
        for (int i = 0; i < nxi; ++i) dot += xi[i] * axis[i];
        // cos of the angle to the axis
        T cosang = dot * recip(sqrt(r2));
        T ramp = smooth_ramp(cosang, cos_outer, cos_inner);
        return base * ramp * pow(1.0 + r2, 0.5 * m);
      },
      "cone_cutoff");
}

// x-localized plateau symbol: plateau(x) * <xi>^m (1D base).
inline SymbolNet sym_plateau_x(double inner, double outer, double m, Box domain, int nxi = 1) {
  return make_symbol(
      1, nxi, m, std::move(domain),
      [inner, outer, m, nxi](double, auto args) {
        using T = std::remove_cvref_t<decltype(args[0])>;
        std::span<const T> xi(args.data() + 1, static_cast<size_t>(nxi));
        return plateau1d(args[0], 0.0, inner, outer) * pow(bracket(xi), m);
      },
      "plateau_x*bracket^" + std::to_string(m));
}

// ---------------------------------------------------------------------------
// Phases
// ---------------------------------------------------------------------------

// phi(y, xi) = y . xi (parameter-free, any dimension).
inline PhaseNet phase_linear(int n, Box domain, std::string label = "linear") {
  return make_phase(
      0, n, n, std::move(domain),
      [n](double, auto args) {
        using T = std::remove_cvref_t<decltype(args[0])>;
        T s = args[0] * args[n];
        for (int i = 1; i < n; ++i) s += args[i] * args[n + i];
        return s;
      },
      std::move(label));
}

// phi(x, y, xi) = (x - y) . xi  (parametric identity-operator phase).
inline PhaseNet phase_shift(int n, Box domain, std::string label = "shift") {
  return make_phase(
      n, n, n, std::move(domain),
      [n](double, auto args) {
        using T = std::remove_cvref_t<decltype(args[0])>;
        T s = (args[0] - args[n]) * args[2 * n];
        for (int i = 1; i < n; ++i) s += (args[i] - args[n + i]) * args[2 * n + i];
        return s;
      },
      std::move(label));
}

// phi_eps(x, y, xi) = (x - eps y) xi  (1D; the small-scale family).
inline PhaseNet phase_small_scale(Box domain, std::string label = "small_scale") {
  return make_phase(
      1, 1, 1, std::move(domain),
      [](double eps, auto args) { return (args[0] - eps * args[1]) * args[2]; }, std::move(label));
}

// phi_eps(y, xi) = -eps y_1 xi_1 - s_eps y_2 xi_2 with s_eps = 1/log(1/eps).
inline PhaseNet phase_two_scale(Box domain, std::string label = "two_scale") {
  return make_phase(
      0, 2, 2, std::move(domain),
      [](double eps, auto args) {
        double s = 1.0 / std::log(1.0 / std::min(eps, 0.99));
        return -eps * (args[0] * args[2]) - s * (args[1] * args[3]);
      },
      std::move(label));
}

// phi_eps(y, xi) = -eps y_1 xi_1 - c y_2 xi_2 (uniformly nondegenerate in
// the second slot when c = 1).
inline PhaseNet phase_aniso(double c, Box domain, std::string label = "aniso") {
  return make_phase(
      0, 2, 2, std::move(domain),
      [c](double eps, auto args) {
        return -eps * (args[0] * args[2]) - c * (args[1] * args[3]);
      },
      std::move(label));
}

// ---------------------------------------------------------------------------
// Test functions (GFunc)
// ---------------------------------------------------------------------------

// Compactly supported bump, value `height` at the center.
inline GFunc gf_bump(double center, double radius, double height = 1.0, double box_half = 8.0,
                     int n = 1 << 10) {
  Box grid = Box::cube(1, box_half);
  Box supp({center - radius}, {center + radius});
  return make_gfunc(
      1, grid, n, supp,
      [center, radius, height](double, auto args) {
        return make_const(args[0], Cplx(height, 0)) * bump1d(args[0], center, radius);
      },
      "bump");
}

// Truncated Gaussian: exp(-x^2 / (2 sigma^2)) * plateau. The plateau ramp
// sits where the Gaussian has decayed to ~1e-16, so the window's
// high-derivative ringing is damped below roundoff and the spectrum stays
// effectively Gaussian.
inline GFunc gf_gaussian(double sigma, double box_half = 8.0, int n = 1 << 10) {
  Box grid = Box::cube(1, box_half);
  double inner = std::min(8.6 * sigma, 0.75 * box_half);
  double cut = std::min(inner + 1.0, 0.9 * box_half);
  Box supp = Box::cube(1, cut);
  return make_gfunc(
      1, grid, n, supp,
      [sigma, inner, cut](double, auto args) {
        using T = std::remove_cvref_t<decltype(args[0])>;
        T g = exp(args[0] * args[0] * (-0.5 / (sigma * sigma)));
        return g * plateau1d(args[0], 0.0, inner, 0.98 * cut);
      },
      "gaussian");
}

// Modulated bump e^{i w y} * bump(y): band-limited around frequency w.
inline GFunc gf_modulated(double w, double center, double radius, double box_half = 8.0,
                          int n = 1 << 11) {
  Box grid = Box::cube(1, box_half);
  Box supp({center - radius}, {center + radius});
  return make_gfunc(
      1, grid, n, supp,
      [w, center, radius](double, auto args) {
        using T = std::remove_cvref_t<decltype(args[0])>;
        T ph = exp(make_const(args[0], Cplx(0, w)) * args[0]);
        return ph * bump1d(args[0], center, radius);
      },
      "modulated");
}

// Mollified Heaviside: (H * rho_eps)(x) with a smooth mollifier at scale
// eps; realized as the closed form int_{-inf}^{x/eps} rho.
inline GFunc gf_mollified_heaviside(double box_half = 2.0, int n = 1 << 12) {
  Box grid = Box::cube(1, box_half);
  Box supp = Box::cube(1, 0.95 * box_half);
  return make_gfunc(
      1, grid, n, supp,
      [box_half](double eps, auto args) {
        using T = std::remove_cvref_t<decltype(args[0])>;
        // smooth CDF ramp at scale eps, flattened at the support edge
        T t = args[0] * (1.0 / eps);
        T h = smooth_ramp(t, -1.0, 1.0);
        return h * plateau1d(args[0], 0.0, 0.8 * box_half, 0.94 * box_half);
      },
      "mollified_heaviside");
}

// Delta net eps^{-1} rho(x / eps).
inline GFunc gf_delta_net(double box_half = 2.0, int n = 1 << 12) {
  Box grid = Box::cube(1, box_half);
  Box supp = Box::cube(1, 0.95 * box_half);
  return make_gfunc(
      1, grid, n, supp,
      [](double eps, auto args) {
        using T = std::remove_cvref_t<decltype(args[0])>;
        return make_const(args[0], Cplx(1.0 / eps, 0)) * bump1d(args[0], 0.0, eps);
      },
      "delta_net");
}

// Fixed smooth compactly supported function (eps-independent).
inline GFunc gf_fixed_smooth(double box_half = 2.0, int n = 1 << 12) {
  Box grid = Box::cube(1, box_half);
  Box supp = Box::cube(1, 0.9 * box_half);
  return make_gfunc(
      1, grid, n, supp,
      [box_half](double, auto args) {
        using T = std::remove_cvref_t<decltype(args[0])>;
        return cos(args[0] * 2.0) * bump1d(args[0], 0.0, 0.9 * box_half);
      },
      "fixed_smooth");
}

}  // namespace builtins
}  // namespace oscintlab
