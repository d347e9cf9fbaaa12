#pragma once

// Smooth profile functions written generically so that the same body
// evaluates on plain complex numbers and on jets. Branch selection uses the
// real part of the evaluation point; each branch is smooth on an open
// neighborhood, so jets through these functions are exact away from the
// (measure-zero) seam points.

#include "jets.hpp"

namespace oscintlab {

// 0 for s <= 0, 1 for s >= 1, monotone ramp with 12 continuous derivatives
// (polynomial smoothstep of order 12). The polynomial form keeps high
// derivatives moderate; the exp-type C^inf bump has |d^6 B| ~ 1e7 spikes
// that destabilize repeated transport through the regularizing operators.
// Derivative depth used anywhere in the library stays below 12.
template <class T>
T smooth_step01(const T& s) {
  double sv = branch_value(s);
  if (sv <= 1e-12) return make_const(s, 0.0);
  if (sv >= 1.0 - 1e-12) return make_const(s, 1.0);
  // S(s) = s^13 * sum_k c_k s^k with c_k = (-1)^k C(12+k,k) C(25,12-k).
  static constexpr double c[13] = {5200300.0,     -57946200.0,   297457160.0,  -929553625.0,
                                   1968466500.0,  -2974571600.0, 3287684400.0, -2677114440.0,
                                   1593520500.0,  -676039000.0,  193993800.0,  -33801950.0,
                                   2704156.0};
  T acc = make_const(s, c[12]);
  for (int k = 11; k >= 0; --k) acc = acc * s + c[k];
  T s2 = s * s;
  T s4 = s2 * s2;
  T s13 = s4 * s4 * s4 * s;
  return s13 * acc;
}

// 0 for t <= lo, 1 for t >= hi.
template <class T>
T smooth_ramp(const T& t, double lo, double hi) {
  return smooth_step01((t - lo) / (hi - lo));
}

// C_c^infty bump: exp(1 - 1/(1 - s)) for s < 1, 0 for s >= 1, where s is the
// squared scaled radius. Value 1 at s = 0.
template <class T>
T bump_from_sq(const T& s) {
  double sv = branch_value(s);
  if (sv >= 1.0 - 1e-12) return make_const(s, 0.0);
  return exp(1.0 - recip(1.0 - s));
}

// One-dimensional bump centered at c with radius r (value 1 at center).
template <class T>
T bump1d(const T& x, double c, double r) {
  T s = (x - c) * (x - c) / (r * r);
  return bump_from_sq(s);
}

// 1 on [c-a, c+a], 0 outside [c-b, c+b], smooth in between (0 < a < b).
template <class T>
T plateau1d(const T& x, double c, double a, double b) {
  double xv = branch_value(x);
  double d = std::abs(xv - c);
  if (d <= a + 1e-12) return make_const(x, 1.0);
  if (d >= b - 1e-12) return make_const(x, 0.0);
  T s = ((x - c) * (x - c) - a * a) / (b * b - a * a);
  return 1.0 - smooth_step01(s);
}

// Japanese bracket <xi> = sqrt(1 + |xi|^2).
template <class T>
T bracket(std::span<const T> xi) {
  T s = make_const(xi[0], 1.0);
  for (const T& c : xi) s += c * c;
  return sqrt(s);
}

template <class T>
T norm_sq(std::span<const T> v) {
  T s = make_const(v[0], 0.0);
  for (const T& c : v) s += c * c;
  return s;
}

// |xi| as a smooth function away from 0 (callers keep |xi| > 0).
template <class T>
T norm_of(std::span<const T> v) {
  return sqrt(norm_sq(v));
}

// Radial cutoff: 0 for |xi| <= lo, 1 for |xi| >= hi. Smooth everywhere
// including the origin (identically 0 near it). Works on the squared radius
// to avoid differentiating |xi| at small radii.
template <class T>
T radial_cutoff(std::span<const T> xi, double lo, double hi) {
  T r2 = norm_sq(xi);
  return smooth_ramp(r2, lo * lo, hi * hi);
}

}  // namespace oscintlab
