#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace oscintlab {

using Cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
// Floor used before taking logs of nets that legitimately underflow.
inline constexpr double kLogFloor = 1e-300;

struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct EvaluationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Multi-indices
// ---------------------------------------------------------------------------

using MultiIndex = std::vector<int>;

inline int mi_order(const MultiIndex& a) {
  return std::accumulate(a.begin(), a.end(), 0);
}

inline double mi_factorial(const MultiIndex& a) {
  double f = 1.0;
  for (int k : a)
    for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// Enumerates all multi-indices of the given dimension with |alpha| <= max_order.
inline std::vector<MultiIndex> all_multi_indices(int dim, int max_order) {
  std::vector<MultiIndex> out;
  MultiIndex cur(dim, 0);
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == dim) {
      out.push_back(cur);
      return;
    }
    for (int k = 0; k <= left; ++k) {
      cur[pos] = k;
      rec(pos + 1, left - k);
    }
    cur[pos] = 0;
  };
  rec(0, max_order);
  return out;
}

// ---------------------------------------------------------------------------
// Boxes and lattices
// ---------------------------------------------------------------------------

struct Box {
  std::vector<double> lo, hi;

  Box() = default;
  Box(std::vector<double> l, std::vector<double> h) : lo(std::move(l)), hi(std::move(h)) {
    if (lo.size() != hi.size()) throw InvalidInput("Box: lo/hi dimension mismatch");
    for (size_t i = 0; i < lo.size(); ++i)
      if (lo[i] > hi[i]) throw InvalidInput("Box: lo > hi");
  }
  static Box cube(int dim, double half_width) {
    return Box(std::vector<double>(dim, -half_width), std::vector<double>(dim, half_width));
  }
  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(std::span<const double> x, double slack = 1e-12) const {
    for (size_t i = 0; i < lo.size(); ++i)
      if (x[i] < lo[i] - slack || x[i] > hi[i] + slack) return false;
    return true;
  }
  bool contains_box(const Box& other, double slack = 1e-12) const {
    for (size_t i = 0; i < lo.size(); ++i)
      if (other.lo[i] < lo[i] - slack || other.hi[i] > hi[i] + slack) return false;
    return true;
  }
  Box shrunk(double factor) const {
    Box b = *this;
    for (size_t i = 0; i < lo.size(); ++i) {
      double c = 0.5 * (lo[i] + hi[i]), r = 0.5 * (hi[i] - lo[i]) * factor;
      b.lo[i] = c - r;
      b.hi[i] = c + r;
    }
    return b;
  }
};

// Uniform lattice over a box, n_per_axis points per axis, endpoints included
// (single midpoint when n_per_axis == 1).
inline std::vector<std::vector<double>> box_lattice(const Box& box, int n_per_axis) {
  int d = box.dim();
  std::vector<std::vector<double>> pts;
  std::vector<double> cur(d, 0.0);
  std::function<void(int)> rec = [&](int pos) {
    if (pos == d) {
      pts.push_back(cur);
      return;
    }
    for (int i = 0; i < n_per_axis; ++i) {
      cur[pos] = n_per_axis == 1 ? 0.5 * (box.lo[pos] + box.hi[pos])
                                 : box.lo[pos] + (box.hi[pos] - box.lo[pos]) * i / (n_per_axis - 1);
      rec(pos + 1);
    }
  };
  rec(0);
  return pts;
}

// Unit directions: {-1,+1} in 1D, uniform angles in 2D, lat/long grid in 3D.
inline std::vector<std::vector<double>> sphere_directions(int dim, int count) {
  std::vector<std::vector<double>> dirs;
  if (dim == 1) {
    dirs.push_back({1.0});
    dirs.push_back({-1.0});
  } else if (dim == 2) {
    for (int i = 0; i < count; ++i) {
      double th = 2.0 * kPi * i / count;
      dirs.push_back({std::cos(th), std::sin(th)});
    }
  } else if (dim == 3) {
    int nlat = std::max(2, static_cast<int>(std::sqrt(static_cast<double>(count) / 2.0)));
    int nlon = std::max(4, count / nlat);
    for (int i = 0; i < nlat; ++i) {
      double phi = kPi * (i + 0.5) / nlat;
      for (int j = 0; j < nlon; ++j) {
        double th = 2.0 * kPi * j / nlon;
        dirs.push_back({std::sin(phi) * std::cos(th), std::sin(phi) * std::sin(th), std::cos(phi)});
      }
    }
  } else {
    throw InvalidInput("sphere_directions: dim > 3 not supported");
  }
  return dirs;
}

// Dyadic radial shells {r0, 2 r0, ..., <= r_max}.
inline std::vector<double> radial_shells(double r0, double r_max) {
  std::vector<double> out;
  for (double r = r0; r <= r_max * (1 + 1e-12); r *= 2.0) out.push_back(r);
  return out;
}

inline double norm2(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double japanese_bracket(double r) { return std::sqrt(1.0 + r * r); }

// ---------------------------------------------------------------------------
// EpsGrid: the sampling grid in the regularization parameter.
// ---------------------------------------------------------------------------

struct EpsGrid {
  std::vector<double> values;  // strictly decreasing, in (0,1]

  EpsGrid() = default;
  explicit EpsGrid(std::vector<double> v) : values(std::move(v)) {
    canonicalize();
    validate();
  }

  // eps_i = 2^{-i}, i = i_min..i_max. Default 3..18 (16 points).
  static EpsGrid dyadic(int i_min = 3, int i_max = 18) {
    std::vector<double> v;
    for (int i = i_min; i <= i_max; ++i) v.push_back(std::ldexp(1.0, -i));
    return EpsGrid(std::move(v));
  }

  // count points with log(1/eps) uniform between the endpoints.
  static EpsGrid log_uniform(double eps_max, double eps_min, int count) {
    std::vector<double> v;
    double a = std::log(1.0 / eps_max), b = std::log(1.0 / eps_min);
    for (int i = 0; i < count; ++i)
      v.push_back(std::exp(-(a + (b - a) * i / (count - 1))));
    return EpsGrid(std::move(v));
  }

  size_t size() const { return values.size(); }
  double operator[](size_t i) const { return values[i]; }
  auto begin() const { return values.begin(); }
  auto end() const { return values.end(); }

  void canonicalize() {
    std::sort(values.begin(), values.end(), std::greater<double>());
    values.erase(std::unique(values.begin(), values.end()), values.end());
  }
  void validate(size_t min_count = 8) const {
    if (values.size() < min_count)
      throw InvalidInput("EpsGrid: need at least " + std::to_string(min_count) + " samples");
    for (double e : values)
      if (!(e > 0.0 && e <= 1.0)) throw InvalidInput("EpsGrid: values must lie in (0,1]");
  }
};

}  // namespace oscintlab
