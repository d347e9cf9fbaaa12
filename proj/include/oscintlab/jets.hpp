#pragma once

// Truncated multivariate Taylor ("jet") arithmetic. A Jet stores the Taylor
// coefficients of a function at a point, up to a fixed total degree, in a
// fixed number of variables. Arithmetic on jets realizes exact derivative
// propagation through arbitrary compositions, which is what every derivative
// oracle in this library is built on.
//
// Degrees only flow upward through products, so coefficients of degree <= d
// of any arithmetic combination depend only on input coefficients of degree
// <= d. Extracting a derivative shifts validity down by one degree; callers
// therefore evaluate at (needed order + number of extractions).

#include <array>
#include <memory>
#include <mutex>
#include <unordered_map>

#include "common.hpp"

namespace oscintlab {

class JetSpace {
 public:
  static constexpr int kMaxDim = 8;
  using Expo = std::array<uint8_t, kMaxDim>;

  int dim() const { return dim_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(exps_.size()); }
  const Expo& exponent(int i) const { return exps_[i]; }
  int degree(int i) const { return deg_[i]; }

  int rank(const Expo& e) const {
    auto it = rank_.find(pack(e));
    if (it == rank_.end()) return -1;
    return it->second;
  }

  struct MulTriple {
    int32_t a, b, t;
  };
  // Triples sorted by target degree; prefix_end(d) bounds the triples with
  // deg(t) <= d, enabling degree-truncated products.
  const std::vector<MulTriple>& mul_triples() const { return mul_; }
  size_t prefix_end(int deg) const {
    return mul_prefix_[std::clamp(deg, 0, order_)];
  }

  // (src, dst, factor) triples realizing d/dx_v.
  struct DerivEntry {
    int32_t src, dst;
    double factor;
  };
  const std::vector<DerivEntry>& deriv_table(int v) const { return deriv_[v]; }

  static const JetSpace& get(int dim, int order);

 private:
  JetSpace(int dim, int order);
  static uint64_t pack(const Expo& e) {
    uint64_t k = 0;
    for (int i = 0; i < kMaxDim; ++i) k = (k << 8) | e[i];
    return k;
  }

  int dim_, order_;
  std::vector<Expo> exps_;
  std::vector<int> deg_;
  std::unordered_map<uint64_t, int> rank_;
  std::vector<MulTriple> mul_;
  std::vector<size_t> mul_prefix_;
  std::vector<std::vector<DerivEntry>> deriv_;
};

inline JetSpace::JetSpace(int dim, int order) : dim_(dim), order_(order) {
  if (dim < 1 || dim > kMaxDim) throw InvalidInput("JetSpace: bad dimension");
  if (order < 0 || order > 250) throw InvalidInput("JetSpace: bad order");
  // Graded enumeration of exponents.
  for (int total = 0; total <= order; ++total) {
    Expo e{};
    std::function<void(int, int)> rec = [&](int pos, int left) {
      if (pos == dim - 1) {
        e[pos] = static_cast<uint8_t>(left);
        exps_.push_back(e);
        deg_.push_back(total);
        return;
      }
      for (int k = left; k >= 0; --k) {
        e[pos] = static_cast<uint8_t>(k);
        rec(pos + 1, left - k);
      }
      e[pos] = 0;
    };
    rec(0, total);
  }
  rank_.reserve(exps_.size() * 2);
  for (int i = 0; i < size(); ++i) rank_[pack(exps_[i])] = i;

  for (int i = 0; i < size(); ++i) {
    for (int j = 0; j < size(); ++j) {
      if (deg_[i] + deg_[j] > order) continue;
      Expo t{};
      for (int v = 0; v < dim; ++v) t[v] = static_cast<uint8_t>(exps_[i][v] + exps_[j][v]);
      mul_.push_back({i, j, rank_.at(pack(t))});
    }
  }
  std::stable_sort(mul_.begin(), mul_.end(),
                   [this](const MulTriple& x, const MulTriple& y) {
                     return deg_[x.t] < deg_[y.t];
                   });
  mul_prefix_.assign(order + 1, mul_.size());
  for (int d = 0; d <= order; ++d) {
    size_t e = 0;
    while (e < mul_.size() && deg_[mul_[e].t] <= d) ++e;
    mul_prefix_[d] = e;
  }

  deriv_.resize(dim);
  for (int v = 0; v < dim; ++v) {
    for (int i = 0; i < size(); ++i) {
      if (exps_[i][v] == 0) continue;
      Expo t = exps_[i];
      t[v] -= 1;
      deriv_[v].push_back({i, rank_.at(pack(t)), static_cast<double>(exps_[i][v])});
    }
  }
}

inline const JetSpace& JetSpace::get(int dim, int order) {
  static std::mutex mu;
  static std::unordered_map<uint64_t, std::unique_ptr<JetSpace>> cache;
  std::lock_guard<std::mutex> lock(mu);
  uint64_t key = (static_cast<uint64_t>(dim) << 32) | static_cast<uint32_t>(order);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, std::unique_ptr<JetSpace>(new JetSpace(dim, order))).first;
  return *it->second;
}

class Jet {
 public:
  Jet() : space_(nullptr) {}
  explicit Jet(const JetSpace& s) : space_(&s), c_(s.size(), Cplx(0, 0)) {}

  static Jet constant(const JetSpace& s, Cplx v) {
    Jet j(s);
    j.c_[0] = v;
    return j;
  }
  // value + 1 * x_var
  static Jet variable(const JetSpace& s, int var, double value) {
    Jet j(s);
    j.c_[0] = value;
    if (s.order() >= 1) {
      JetSpace::Expo e{};
      e[var] = 1;
      j.c_[s.rank(e)] = 1.0;
    }
    return j;
  }

  const JetSpace& space() const { return *space_; }
  Cplx value() const { return c_[0]; }
  Cplx coeff(int i) const { return c_[i]; }
  Cplx& coeff(int i) { return c_[i]; }

  // Taylor coefficient for the exponent alpha (zero-padded to the space dim).
  Cplx coeff_mi(const MultiIndex& alpha) const {
    JetSpace::Expo e{};
    for (size_t i = 0; i < alpha.size(); ++i) e[i] = static_cast<uint8_t>(alpha[i]);
    int r = space_->rank(e);
    if (r < 0) throw InvalidInput("Jet::coeff_mi: exponent outside jet order");
    return c_[r];
  }
  // Mixed partial derivative d^alpha f = alpha! * taylor coefficient.
  Cplx deriv_mi(const MultiIndex& alpha) const { return coeff_mi(alpha) * mi_factorial(alpha); }

  Jet derivative(int var) const {
    Jet out(*space_);
    for (const auto& d : space_->deriv_table(var)) out.c_[d.dst] = c_[d.src] * d.factor;
    return out;
  }

  Jet& operator+=(const Jet& o) {
    for (int i = 0; i < space_->size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (int i = 0; i < space_->size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Jet& operator*=(Cplx s) {
    for (auto& x : c_) x *= s;
    return *this;
  }
  Jet& operator+=(Cplx s) {
    c_[0] += s;
    return *this;
  }
  Jet& operator-=(Cplx s) {
    c_[0] -= s;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator+(Jet a, Cplx s) { return a += s; }
  friend Jet operator+(Cplx s, Jet a) { return a += s; }
  friend Jet operator-(Jet a, Cplx s) { return a -= s; }
  friend Jet operator-(Cplx s, const Jet& a) {
    Jet out = a * Cplx(-1, 0);
    out += s;
    return out;
  }
  friend Jet operator*(Jet a, Cplx s) { return a *= s; }
  friend Jet operator*(Cplx s, Jet a) { return a *= s; }
  friend Jet operator/(Jet a, Cplx s) { return a *= (1.0 / s); }
  friend Jet operator-(const Jet& a) { return a * Cplx(-1, 0); }
  friend Jet operator+(Jet a, double s) { return a += Cplx(s, 0); }
  friend Jet operator+(double s, Jet a) { return a += Cplx(s, 0); }
  friend Jet operator-(Jet a, double s) { return a -= Cplx(s, 0); }
  friend Jet operator-(double s, const Jet& a) { return Cplx(s, 0) - a; }
  friend Jet operator*(Jet a, double s) { return a *= Cplx(s, 0); }
  friend Jet operator*(double s, Jet a) { return a *= Cplx(s, 0); }
  friend Jet operator/(Jet a, double s) { return a *= Cplx(1.0 / s, 0); }

  // Product truncated to total degree maxdeg.
  Jet mul_to(const Jet& b, int maxdeg) const {
    Jet out(*space_);
    const auto& triples = space_->mul_triples();
    size_t end = space_->prefix_end(maxdeg);
    for (size_t i = 0; i < end; ++i) {
      const auto& t = triples[i];
      const Cplx ca = c_[t.a];
      if (ca == Cplx(0, 0)) continue;
      out.c_[t.t] += ca * b.c_[t.b];
    }
    return out;
  }

  // Copies coefficients into another space of the same dimension (typically
  // lower order).
  Jet project(const JetSpace& target) const {
    Jet out(target);
    for (int i = 0; i < target.size(); ++i) {
      int r = space_->rank(target.exponent(i));
      out.c_[i] = r >= 0 ? c_[r] : Cplx(0, 0);
    }
    return out;
  }

  friend Jet operator*(const Jet& a, const Jet& b) { return a.mul_to(b, a.space().order()); }
  friend Jet operator/(const Jet& a, const Jet& b) { return a * recip(b); }
  friend Jet operator/(Cplx s, const Jet& b) { return recip(b) *= s; }
  friend Jet operator/(double s, const Jet& b) { return recip(b) *= Cplx(s, 0); }

  // Applies an analytic scalar function given its value and the per-order
  // series coefficients g_i such that f(z0 + n) = sum_i g_i n^i.
  Jet analytic_series(const std::vector<Cplx>& g) const {
    const JetSpace& s = *space_;
    Jet n = *this;
    n.c_[0] = 0;  // nilpotent part
    Jet out = Jet::constant(s, g.back());
    for (int i = static_cast<int>(g.size()) - 2; i >= 0; --i) {
      out = out * n;
      out.c_[0] += g[i];
    }
    return out;
  }

  friend Jet recip(const Jet& a) {
    Cplx z0 = a.value();
    if (z0 == Cplx(0, 0)) throw EvaluationError("jet reciprocal at zero");
    int K = a.space().order();
    std::vector<Cplx> g(K + 1);
    Cplx p = 1.0 / z0;
    for (int i = 0; i <= K; ++i) {
      g[i] = p;
      p *= -1.0 / z0;
    }
    return a.analytic_series(g);
  }
  friend Jet exp(const Jet& a) {
    int K = a.space().order();
    std::vector<Cplx> g(K + 1);
    Cplx e0 = std::exp(a.value());
    double fact = 1.0;
    for (int i = 0; i <= K; ++i) {
      if (i > 0) fact *= i;
      g[i] = e0 / fact;
    }
    return a.analytic_series(g);
  }
  friend Jet log(const Jet& a) {
    Cplx z0 = a.value();
    if (z0 == Cplx(0, 0)) throw EvaluationError("jet log at zero");
    int K = a.space().order();
    std::vector<Cplx> g(K + 1);
    g[0] = std::log(z0);
    Cplx p = 1.0 / z0;
    for (int i = 1; i <= K; ++i) {
      g[i] = p / static_cast<double>(i) * (i % 2 ? 1.0 : -1.0);
      p /= z0;
    }
    return a.analytic_series(g);
  }
  friend Jet pow(const Jet& a, double alpha) {
    Cplx z0 = a.value();
    if (z0 == Cplx(0, 0)) throw EvaluationError("jet pow at zero");
    int K = a.space().order();
    std::vector<Cplx> g(K + 1);
    Cplx p = std::pow(z0, alpha);
    double binom = 1.0;
    for (int i = 0; i <= K; ++i) {
      g[i] = p * binom;
      p /= z0;
      binom *= (alpha - i) / (i + 1);
    }
    return a.analytic_series(g);
  }
  friend Jet sqrt(const Jet& a) { return pow(a, 0.5); }
  friend Jet sin(const Jet& a) {
    Cplx i(0, 1);
    return (exp(i * a) - exp(-i * a)) / Cplx(0, 2);
  }
  friend Jet cos(const Jet& a) {
    Cplx i(0, 1);
    return (exp(i * a) + exp(-i * a)) / Cplx(2, 0);
  }
  friend Jet conj_value(const Jet& a) {  // conjugates coefficients
    Jet out = a;
    for (auto& x : out.c_) x = std::conj(x);
    return out;
  }

  friend double branch_value(const Jet& a) { return a.value().real(); }

 private:
  const JetSpace* space_;
  std::vector<Cplx> c_;
};

// Generic-code shims so the same templated body runs on plain complex numbers
// and on jets.
inline double branch_value(const Cplx& z) { return z.real(); }
inline double branch_value(double x) { return x; }
inline Cplx recip(const Cplx& z) { return 1.0 / z; }

template <class T>
T make_const(const T& like, Cplx v);
template <>
inline Cplx make_const<Cplx>(const Cplx&, Cplx v) {
  return v;
}
template <>
inline Jet make_const<Jet>(const Jet& like, Cplx v) {
  return Jet::constant(like.space(), v);
}

// ---------------------------------------------------------------------------
// Type-erased scalar functions of several variables with both a value and a
// jet instantiation. All builders in the library consume and produce these.
// ---------------------------------------------------------------------------

struct GenericFn {
  int arity = 0;
  std::function<Cplx(double, std::span<const Cplx>)> val;
  std::function<Jet(double, std::span<const Jet>)> jet;

  bool valid() const { return static_cast<bool>(val); }
  bool has_jet() const { return static_cast<bool>(jet); }
};

// F must expose: template<class T> T operator()(double eps, span<const T>).
template <class F>
GenericFn erase_fn(int arity, F f) {
  GenericFn g;
  g.arity = arity;
  g.val = [f](double eps, std::span<const Cplx> a) -> Cplx { return f(eps, a); };
  g.jet = [f](double eps, std::span<const Jet> a) -> Jet { return f(eps, a); };
  return g;
}

// Evaluates a GenericFn's jet at a real point, seeding every argument.
inline Jet jet_at_point(const GenericFn& f, double eps, std::span<const double> pt, int order) {
  const JetSpace& s = JetSpace::get(static_cast<int>(pt.size()), order);
  std::vector<Jet> args;
  args.reserve(pt.size());
  for (size_t i = 0; i < pt.size(); ++i)
    args.push_back(Jet::variable(s, static_cast<int>(i), pt[i]));
  return f.jet(eps, args);
}

inline Cplx value_at_point(const GenericFn& f, double eps, std::span<const double> pt) {
  std::vector<Cplx> args(pt.begin(), pt.end());
  return f.val(eps, args);
}

// ---------------------------------------------------------------------------
// Finite-difference jet synthesis: fallback derivative oracle for functions
// that only provide values. Central differences with one Richardson
// refinement, per-variable steps.
// ---------------------------------------------------------------------------

namespace detail {

inline Cplx fd_mixed(const std::function<Cplx(std::span<const double>)>& f,
                     std::vector<double>& pt, const MultiIndex& alpha,
                     std::span<const double> steps) {
  int v = -1;
  for (size_t i = 0; i < alpha.size(); ++i)
    if (alpha[i] > 0) {
      v = static_cast<int>(i);
      break;
    }
  if (v < 0) return f(pt);
  MultiIndex a2 = alpha;
  a2[v] -= 1;
  double h = steps[v];
  pt[v] += h;
  Cplx fp = fd_mixed(f, pt, a2, steps);
  pt[v] -= 2 * h;
  Cplx fm = fd_mixed(f, pt, a2, steps);
  pt[v] += h;
  return (fp - fm) / (2 * h);
}

}  // namespace detail

inline Jet fd_jet(const std::function<Cplx(std::span<const double>)>& f,
                  std::span<const double> pt, int order, std::span<const double> steps) {
  const JetSpace& s = JetSpace::get(static_cast<int>(pt.size()), order);
  Jet out(s);
  std::vector<double> work(pt.begin(), pt.end());
  std::vector<double> half(steps.begin(), steps.end());
  for (auto& h : half) h *= 0.5;
  for (int i = 0; i < s.size(); ++i) {
    MultiIndex alpha(pt.size());
    for (size_t v = 0; v < pt.size(); ++v) alpha[v] = s.exponent(i)[v];
    Cplx dh = detail::fd_mixed(f, work, alpha, steps);
    if (mi_order(alpha) > 0) {
      Cplx dh2 = detail::fd_mixed(f, work, alpha, half);
      // Richardson: central differences have O(h^2) error.
      dh = (4.0 * dh2 - dh) / 3.0;
    }
    out.coeff(i) = dh / mi_factorial(alpha);
  }
  return out;
}

}  // namespace oscintlab
