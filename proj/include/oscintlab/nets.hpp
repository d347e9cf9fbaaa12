#pragma once

// Scale machinery for eps-parametrized nets: power-law fitting in log-log
// coordinates, classification into moderate / negligible / slow-scale /
// not-moderate, and strict-nonzero tests. Every classification on a finite
// grid is an estimate; reports label results accordingly.

#include <map>

#include "common.hpp"

namespace oscintlab {

struct NetConfig {
  int q_max = 10;              // test ceiling for "for all q"
  double r_max = 20.0;         // largest witness exponent for strict nonzero
  double residual_threshold = 0.5;  // log-space residual gate for clean power laws
  double superpoly_factor = 2.0;    // windowed-slope ratio triggering the flag
  double slope_tol = 0.1;      // tolerance on growth-trend slopes
};

struct ScaleFit {
  double slope = 0.0;      // exponent b in p(eps) ~ C * eps^b
  double intercept = 0.0;  // log C
  double residual = 0.0;   // RMS residual in log space
  bool superpolynomial_flag = false;
  // Windowed slope over the small-eps third of the grid; equals `slope` for
  // clean power laws.
  double tail_slope = 0.0;
};

namespace detail {

struct LinFit {
  double slope = 0, intercept = 0, rms = 0;
};

inline LinFit least_squares(std::span<const double> x, std::span<const double> y) {
  size_t n = x.size();
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LinFit f;
  f.slope = sxx == 0 ? 0.0 : sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (size_t i = 0; i < n; ++i) {
    double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.rms = std::sqrt(ss / n);
  return f;
}

inline std::vector<double> clamped_logs(std::span<const double> samples) {
  std::vector<double> out(samples.size());
  for (size_t i = 0; i < samples.size(); ++i)
    out[i] = std::log(std::clamp(samples[i], kLogFloor, 1e300));
  return out;
}

}  // namespace detail

// Least-squares fit of log(sample) against log(eps). Samples must be
// positive; zeros/denormals are clamped to the log floor first.
inline ScaleFit fit_scale(std::span<const double> samples, const EpsGrid& grid,
                          const NetConfig& cfg = {}) {
  if (samples.size() != grid.size())
    throw InvalidInput("fit_scale: samples/grid size mismatch");
  grid.validate();
  for (double s : samples)
    if (!(s >= 0.0)) throw InvalidInput("fit_scale: samples must be >= 0");

  std::vector<double> lx(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) lx[i] = std::log(grid[i]);
  std::vector<double> ly = detail::clamped_logs(samples);

  auto fit = detail::least_squares(lx, ly);
  ScaleFit out;
  out.slope = fit.slope;
  out.intercept = fit.intercept;
  out.residual = fit.rms;

  // Windowed-slope comparison over the last (smallest-eps) third.
  size_t n = grid.size();
  size_t tail = std::max<size_t>(3, n / 3);
  auto tfit = detail::least_squares(std::span(lx).subspan(n - tail), std::span(ly).subspan(n - tail));
  out.tail_slope = tfit.slope;
  if (std::abs(tfit.slope) > cfg.superpoly_factor * std::max(std::abs(fit.slope), 0.5) &&
      std::abs(tfit.slope) > 1.0)
    out.superpolynomial_flag = true;
  return out;
}

// ---------------------------------------------------------------------------
// Net classification
// ---------------------------------------------------------------------------

enum class NetKind { Moderate, Negligible, SlowScale, NotModerate };

inline const char* to_string(NetKind k) {
  switch (k) {
    case NetKind::Moderate: return "Moderate";
    case NetKind::Negligible: return "Negligible";
    case NetKind::SlowScale: return "SlowScale";
    case NetKind::NotModerate: return "NotModerate";
  }
  return "?";
}

struct NetClass {
  NetKind kind = NetKind::Moderate;
  // Moderateness bound: smallest N with samples = O(eps^-N) on the grid
  // (0 when the net decays). Valid whenever kind != NotModerate.
  int N = 0;
  ScaleFit evidence;
};

// Slow-scale grid test. A net r_eps is slow scale iff every power r^q is
// O(1/eps), which at the level of pointwise exponents e(eps) := log r /
// log(1/eps) means e has limit at most 1/q for every q, i.e. limit 0. On a
// finite grid, e carries log-type corrections ~ log(u)/u in u = log(1/eps);
// projecting the limit by regressing e on {1, log(u)/u} and comparing the
// intercept against the tested ceiling 1/q_max is the grid proxy used here.
// A direct per-q sup check (weighted net r^q * eps peaking away from the
// small-eps end) is kept as a corroborating route.
inline bool slow_scale_test(std::span<const double> samples, const EpsGrid& grid,
                            const NetConfig& cfg = {}) {
  size_t n = grid.size();
  std::vector<double> u(n), e(n);
  for (size_t i = 0; i < n; ++i) {
    u[i] = std::log(1.0 / std::min(grid[i], 1.0 - 1e-12));
    e[i] = std::log(std::clamp(samples[i], kLogFloor, 1e300)) / u[i];
  }
  // Two-parameter regression e = A + B log(u)/u.
  double s11 = 0, s12 = 0, s22 = 0, b1 = 0, b2 = 0;
  for (size_t i = 0; i < n; ++i) {
    double g = std::log(std::max(u[i], 1.1)) / u[i];
    s11 += 1;
    s12 += g;
    s22 += g * g;
    b1 += e[i];
    b2 += e[i] * g;
  }
  double det = s11 * s22 - s12 * s12;
  double A = det != 0 ? (b1 * s22 - b2 * s12) / det : b1 / s11;
  bool projected_ok = A <= 1.0 / cfg.q_max + 0.05;

  bool per_q_ok = true;
  std::vector<double> lv(n);
  for (int q = 1; q <= cfg.q_max && per_q_ok; ++q) {
    for (size_t i = 0; i < n; ++i)
      lv[i] = q * std::log(std::clamp(samples[i], kLogFloor, 1e300)) + std::log(grid[i]);
    size_t arg = static_cast<size_t>(std::max_element(lv.begin(), lv.end()) - lv.begin());
    bool peak_interior = arg + 2 < n;
    size_t tail = std::max<size_t>(4, n / 3);
    auto tfit = detail::least_squares(std::span(u).subspan(n - tail), std::span(lv).subspan(n - tail));
    per_q_ok = peak_interior || tfit.slope <= cfg.slope_tol + 0.05;
  }
  return projected_ok || per_q_ok;
}

inline NetClass classify_net(std::span<const double> samples, const EpsGrid& grid,
                             const NetConfig& cfg = {}) {
  NetClass out;
  out.evidence = fit_scale(samples, grid, cfg);
  const ScaleFit& f = out.evidence;

  // Identically-zero nets (up to the log floor) are negligible.
  if (*std::max_element(samples.begin(), samples.end()) < 1e-250) {
    out.kind = NetKind::Negligible;
    return out;
  }

  double pointwise_worst = 0.0;  // largest pointwise growth exponent on the tail
  size_t n = grid.size();
  for (size_t i = n - std::max<size_t>(4, n / 3); i < n; ++i) {
    double e = std::log(std::max(samples[i], kLogFloor)) / std::log(grid[i]);
    pointwise_worst = std::min(pointwise_worst, e);
  }
  out.N = std::max(0, static_cast<int>(std::ceil(-(f.residual <= cfg.residual_threshold
                                                       ? f.slope
                                                       : pointwise_worst) -
                                                 1e-9)));

  bool decaying_superpoly = f.superpolynomial_flag && f.tail_slope > 0;
  bool growing_superpoly = f.superpolynomial_flag && f.tail_slope < 0;

  if (f.slope >= static_cast<double>(cfg.q_max) || decaying_superpoly) {
    out.kind = NetKind::Negligible;
    out.N = 0;
    return out;
  }
  if (f.slope <= -static_cast<double>(cfg.q_max) || growing_superpoly) {
    out.kind = NetKind::NotModerate;
    return out;
  }
  // Power-decaying nets rank as Moderate(0); the slow-scale label is reserved
  // for nets that neither decay nor grow faster than the slow-scale ceiling.
  if (f.slope < 0.5 && slow_scale_test(samples, grid, cfg)) {
    out.kind = NetKind::SlowScale;
    return out;
  }
  out.kind = NetKind::Moderate;
  return out;
}

// ---------------------------------------------------------------------------
// Strict-nonzero tests
// ---------------------------------------------------------------------------

enum class NonzeroMode { Power, SlowScale };

struct NonzeroVerdict {
  bool strictly_nonzero = false;
  // Power mode: witness exponent r with |u_eps| >= eps^r on the tail.
  double witness_r = 0.0;
  ScaleFit evidence;
};

inline NonzeroVerdict is_strictly_nonzero(std::span<const double> abs_samples, const EpsGrid& grid,
                                          NonzeroMode mode, const NetConfig& cfg = {}) {
  if (abs_samples.size() != grid.size())
    throw InvalidInput("is_strictly_nonzero: samples/grid size mismatch");
  NonzeroVerdict out;
  out.evidence = fit_scale(abs_samples, grid, cfg);

  if (mode == NonzeroMode::Power) {
    // Pointwise exponents e(eps) = log|u| / log eps; need e <= r on the tail
    // for some r <= r_max.
    size_t n = grid.size();
    size_t tail = std::max<size_t>(4, n / 2);
    double worst = 0.0;
    for (size_t i = n - tail; i < n; ++i) {
      double e = std::log(std::max(abs_samples[i], kLogFloor)) / std::log(grid[i]);
      worst = std::max(worst, e);
    }
    out.witness_r = std::max(worst, 0.0);
    out.strictly_nonzero = worst <= cfg.r_max;
  } else {
    // 1/|u_eps| must be a slow scale net; vanishing samples fail outright.
    bool has_zero = false;
    std::vector<double> inv(abs_samples.size());
    for (size_t i = 0; i < inv.size(); ++i) {
      if (abs_samples[i] < 1e-250) has_zero = true;
      inv[i] = 1.0 / std::max(abs_samples[i], kLogFloor);
    }
    out.strictly_nonzero = !has_zero && slow_scale_test(inv, grid, cfg);
  }
  return out;
}

// ---------------------------------------------------------------------------
// GeneralizedNumber: a complex net sampled on an EpsGrid.
// ---------------------------------------------------------------------------

struct GeneralizedNumber {
  EpsGrid grid;
  std::vector<Cplx> samples;  // one per grid point

  GeneralizedNumber() = default;
  GeneralizedNumber(EpsGrid g, std::vector<Cplx> s) : grid(std::move(g)), samples(std::move(s)) {
    if (samples.size() != grid.size())
      throw InvalidInput("GeneralizedNumber: samples/grid size mismatch");
    for (const Cplx& z : samples)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw InvalidInput("GeneralizedNumber: non-finite sample");
  }

  std::vector<double> abs_samples() const {
    std::vector<double> out(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) out[i] = std::abs(samples[i]);
    return out;
  }
};

}  // namespace oscintlab
