#pragma once

// Truncated multivariate Taylor arithmetic.
//
// A Jet of dimension n and order k stores the Taylor coefficients
// c_a = (d^a f)(x0) / a! for every multi-index a with |a| <= k, in graded
// lexicographic order. Because the order is graded, the coefficients of the
// order-j truncation are a prefix of the order-k coefficient vector.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace yamabe {

inline constexpr int kMaxJetDim = 6;
inline constexpr int kMaxJetOrder = 6;
inline constexpr int kDefaultJetOrder = 4;

/// Raised by elementary functions evaluated outside their domain.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

using MultiIndex = std::array<std::uint8_t, kMaxJetDim>;

class JetLayout {
public:
  struct Product {
    std::uint32_t out, lhs, rhs;
  };

  static const JetLayout& for_dim(int dim) {
    if (dim < 1 || dim > kMaxJetDim)
      throw std::invalid_argument("jet dimension " + std::to_string(dim) + " outside [1, " +
                                  std::to_string(kMaxJetDim) + "]");
    static std::array<std::once_flag, kMaxJetDim + 1> flags;
    static std::array<JetLayout, kMaxJetDim + 1> layouts;
    std::call_once(flags[dim], [dim] { layouts[dim].build(dim); });
    return layouts[dim];
  }

  int dim() const { return dim_; }

  std::size_t size(int order) const { return prefix_size_[order]; }

  const MultiIndex& exponent(std::size_t idx) const { return exponents_[idx]; }
  int degree(std::size_t idx) const { return degrees_[idx]; }
  double factorial(std::size_t idx) const { return factorials_[idx]; }

  /// Index of exponent(idx) + e_axis, or -1 past the maximum order.
  int shifted(std::size_t idx, int axis) const { return shift_[idx * kMaxJetDim + axis]; }

  int index_of(const MultiIndex& a) const {
    int deg = 0;
    for (int i = 0; i < dim_; ++i) deg += a[i];
    if (deg > kMaxJetOrder) return -1;
    return lookup_[encode(a)];
  }

  std::span<const Product> products(int order) const {
    return {products_.data(), product_prefix_[order]};
  }

private:
  static std::size_t encode(const MultiIndex& a) {
    std::size_t code = 0;
    for (int i = 0; i < kMaxJetDim; ++i) code = code * (kMaxJetOrder + 1) + a[i];
    return code;
  }

  void build(int dim) {
    dim_ = dim;
    for (int deg = 0; deg <= kMaxJetOrder; ++deg) {
      MultiIndex a{};
      emit(a, 0, deg);
      prefix_size_[deg] = exponents_.size();
    }
    std::size_t codes = 1;
    for (int i = 0; i < kMaxJetDim; ++i) codes *= kMaxJetOrder + 1;
    lookup_.assign(codes, -1);
    for (std::size_t i = 0; i < exponents_.size(); ++i)
      lookup_[encode(exponents_[i])] = static_cast<int>(i);
    for (const auto& a : exponents_) {
      int d = 0;
      double f = 1.0;
      for (int i = 0; i < dim_; ++i) {
        d += a[i];
        for (int m = 2; m <= a[i]; ++m) f *= m;
      }
      degrees_.push_back(d);
      factorials_.push_back(f);
    }
    shift_.assign(exponents_.size() * kMaxJetDim, -1);
    for (std::size_t i = 0; i < exponents_.size(); ++i)
      for (int ax = 0; ax < dim_; ++ax) {
        MultiIndex b = exponents_[i];
        ++b[ax];
        shift_[i * kMaxJetDim + ax] = index_of(b);
      }
    for (std::size_t o = 0; o < exponents_.size(); ++o)
      for (std::size_t l = 0; l < exponents_.size(); ++l) {
        if (degrees_[l] > degrees_[o]) break;
        MultiIndex r{};
        bool ok = true;
        for (int i = 0; i < dim_ && ok; ++i) {
          if (exponents_[l][i] > exponents_[o][i]) ok = false;
          else r[i] = static_cast<std::uint8_t>(exponents_[o][i] - exponents_[l][i]);
        }
        if (!ok) continue;
        products_.push_back({static_cast<std::uint32_t>(o), static_cast<std::uint32_t>(l),
                             static_cast<std::uint32_t>(index_of(r))});
      }
    for (int k = 0; k <= kMaxJetOrder; ++k) {
      std::size_t n = 0;
      while (n < products_.size() && products_[n].out < prefix_size_[k]) ++n;
      product_prefix_[k] = n;
    }
  }

  // Lexicographic (descending in the leading axis) within one total degree.
  void emit(MultiIndex& a, int axis, int remaining) {
    if (axis == dim_ - 1) {
      a[axis] = static_cast<std::uint8_t>(remaining);
      exponents_.push_back(a);
      a[axis] = 0;
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      a[axis] = static_cast<std::uint8_t>(v);
      emit(a, axis + 1, remaining - v);
    }
    a[axis] = 0;
  }

  int dim_ = 0;
  std::vector<MultiIndex> exponents_;
  std::vector<int> degrees_;
  std::vector<double> factorials_;
  std::vector<int> shift_;
  std::vector<int> lookup_;
  std::vector<Product> products_;
  std::array<std::size_t, kMaxJetOrder + 1> prefix_size_{};
  std::array<std::size_t, kMaxJetOrder + 1> product_prefix_{};
};

class Jet {
public:
  Jet() = default;

  static Jet constant(int dim, int order, double value) {
    Jet j(dim, order);
    j.c_[0] = value;
    return j;
  }

  /// The coordinate function x_axis expanded about a point whose axis-th
  /// coordinate is `value`.
  static Jet variable(int dim, int order, int axis, double value) {
    Jet j = constant(dim, order, value);
    if (order >= 1) j.c_[1 + axis] = 1.0;
    return j;
  }

  int dim() const { return dim_; }
  int order() const { return order_; }
  bool empty() const { return dim_ == 0; }
  double value() const { return c_[0]; }

  std::span<const double> coefficients() const { return c_; }
  std::span<double> coefficients() { return c_; }

  const JetLayout& layout() const { return JetLayout::for_dim(dim_); }

  /// Partial derivative along the multiset of axes, e.g. {0, 0, 1} is d0 d0 d1.
  double partial(std::span<const int> axes) const {
    if (static_cast<int>(axes.size()) > order_)
      throw std::out_of_range("partial of degree " + std::to_string(axes.size()) +
                              " requested from jet of order " + std::to_string(order_));
    MultiIndex a{};
    for (int ax : axes) ++a[ax];
    const auto& lay = layout();
    const int idx = lay.index_of(a);
    return c_[idx] * lay.factorial(idx);
  }
  double partial(std::initializer_list<int> axes) const {
    return partial(std::span<const int>(axes.begin(), axes.size()));
  }

  Jet truncated(int order) const {
    if (order >= order_) return *this;
    Jet j(dim_, order);
    std::copy_n(c_.begin(), j.c_.size(), j.c_.begin());
    return j;
  }

  /// d/dx_axis, one order lower.
  Jet derivative(int axis) const {
    if (order_ < 1) throw std::logic_error("cannot differentiate an order-0 jet");
    Jet j(dim_, order_ - 1);
    const auto& lay = layout();
    for (std::size_t i = 0; i < j.c_.size(); ++i) {
      const int s = lay.shifted(i, axis);
      j.c_[i] = (lay.exponent(i)[axis] + 1) * c_[s];
    }
    return j;
  }

  Jet operator-() const {
    Jet j = *this;
    for (double& v : j.c_) v = -v;
    return j;
  }

  Jet& operator+=(const Jet& o) {
    conform(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    conform(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Jet& operator+=(double v) {
    c_[0] += v;
    return *this;
  }
  Jet& operator-=(double v) {
    c_[0] -= v;
    return *this;
  }
  Jet& operator*=(double v) {
    for (double& x : c_) x *= v;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator+(Jet a, double b) { return a += b; }
  friend Jet operator+(double a, Jet b) { return b += a; }
  friend Jet operator-(Jet a, double b) { return a -= b; }
  friend Jet operator-(double a, const Jet& b) { return (-b) += a; }
  friend Jet operator*(Jet a, double b) { return a *= b; }
  friend Jet operator*(double a, Jet b) { return b *= a; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    check_dim(a, b);
    const int order = std::min(a.order_, b.order_);
    Jet r(a.dim_, order);
    for (const auto& p : a.layout().products(order)) r.c_[p.out] += a.c_[p.lhs] * b.c_[p.rhs];
    return r;
  }

  /// Accumulates a*b into *this without a temporary.
  Jet& add_product(const Jet& a, const Jet& b) {
    check_dim(a, b);
    const int order = std::min({order_, a.order_, b.order_});
    if (order < order_) *this = truncated(order);
    for (const auto& p : a.layout().products(order)) c_[p.out] += a.c_[p.lhs] * b.c_[p.rhs];
    return *this;
  }

  /// f(value + t) = sum_m taylor[m] t^m; evaluates f on this jet.
  Jet compose(std::span<const double> taylor) const {
    Jet nil = *this;
    nil.c_[0] = 0.0;
    Jet r = constant(dim_, order_, taylor[order_]);
    for (int m = order_ - 1; m >= 0; --m) {
      r = r * nil;
      r.c_[0] += taylor[m];
    }
    return r;
  }

  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator/(double a, const Jet& b);
  friend Jet operator/(Jet a, double b) { return a *= 1.0 / b; }

private:
  Jet(int dim, int order) : dim_(dim), order_(order) {
    if (order < 0 || order > kMaxJetOrder)
      throw std::invalid_argument("jet order " + std::to_string(order) + " outside [0, " +
                                  std::to_string(kMaxJetOrder) + "]");
    c_.assign(JetLayout::for_dim(dim).size(order), 0.0);
  }

  static void check_dim(const Jet& a, const Jet& b) {
    if (a.dim_ != b.dim_) throw std::invalid_argument("jet dimension mismatch");
  }

  void conform(const Jet& o) {
    check_dim(*this, o);
    if (o.order_ < order_) *this = truncated(o.order_);
  }

  int dim_ = 0;
  int order_ = 0;
  std::vector<double> c_;
};

namespace detail {

// Univariate truncated power series in t, used to build the Taylor
// coefficients of elementary functions about a scalar base point.
using Series = std::vector<double>;

inline Series series_mul(const Series& a, const Series& b) {
  Series r(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; i + j < a.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

inline Series series_div(const Series& a, const Series& b) {
  Series q(a.size(), 0.0);
  for (std::size_t m = 0; m < a.size(); ++m) {
    double s = a[m];
    for (std::size_t j = 1; j <= m; ++j) s -= b[j] * q[m - j];
    q[m] = s / b[0];
  }
  return q;
}

inline Series sin_cos_series(double x0, int order, bool cosine) {
  Series r(order + 1);
  const double s = std::sin(x0), c = std::cos(x0);
  // derivatives of sin cycle through sin, cos, -sin, -cos
  const double cyc_sin[4] = {s, c, -s, -c};
  const double cyc_cos[4] = {c, -s, -c, s};
  double fact = 1.0;
  for (int m = 0; m <= order; ++m) {
    if (m > 0) fact *= m;
    r[m] = (cosine ? cyc_cos[m % 4] : cyc_sin[m % 4]) / fact;
  }
  return r;
}

inline Series sinh_cosh_series(double x0, int order, bool hyp_cos) {
  Series r(order + 1);
  const double s = std::sinh(x0), c = std::cosh(x0);
  double fact = 1.0;
  for (int m = 0; m <= order; ++m) {
    if (m > 0) fact *= m;
    const bool even = m % 2 == 0;
    r[m] = (hyp_cos ? (even ? c : s) : (even ? s : c)) / fact;
  }
  return r;
}

// (x0 + t)^p for real p, generalized binomial expansion.
inline Series power_series(double x0, double p, int order) {
  Series r(order + 1);
  double binom = 1.0;
  for (int m = 0; m <= order; ++m) {
    if (m > 0) binom *= (p - (m - 1)) / m;
    r[m] = binom * std::pow(x0, p - m);
  }
  return r;
}

}  // namespace detail

inline Jet operator/(double a, const Jet& b) {
  if (b.value() == 0.0) throw DomainError("division by zero");
  detail::Series s(b.order() + 1);
  double p = 1.0 / b.value();
  for (int m = 0; m <= b.order(); ++m) {
    s[m] = a * p;
    p *= -1.0 / b.value();
  }
  return b.compose(s);
}

inline Jet operator/(const Jet& a, const Jet& b) { return a * (1.0 / b); }

inline Jet exp(const Jet& a) {
  detail::Series s(a.order() + 1);
  double fact = 1.0;
  const double e = std::exp(a.value());
  for (int m = 0; m <= a.order(); ++m) {
    if (m > 0) fact *= m;
    s[m] = e / fact;
  }
  return a.compose(s);
}

inline Jet log(const Jet& a) {
  const double x0 = a.value();
  if (!(x0 > 0.0)) throw DomainError("ln of nonpositive value");
  detail::Series s(a.order() + 1);
  s[0] = std::log(x0);
  double p = 1.0;
  for (int m = 1; m <= a.order(); ++m) {
    p /= x0;
    s[m] = (m % 2 == 1 ? 1.0 : -1.0) * p / m;
  }
  return a.compose(s);
}

inline Jet sqrt(const Jet& a) {
  const double x0 = a.value();
  if (x0 < 0.0 || (x0 == 0.0 && a.order() > 0)) throw DomainError("sqrt of negative value");
  return a.compose(detail::power_series(x0, 0.5, a.order()));
}

/// a^p for real p; requires a > 0 unless p is handled by ipow.
inline Jet pow(const Jet& a, double p) {
  if (!(a.value() > 0.0)) throw DomainError("non-integer power of nonpositive base");
  return a.compose(detail::power_series(a.value(), p, a.order()));
}

inline Jet ipow(const Jet& a, long long p) {
  if (p < 0) return 1.0 / ipow(a, -p);
  Jet result = Jet::constant(a.dim(), a.order(), 1.0);
  Jet base = a;
  while (p > 0) {
    if (p & 1) result = result * base;
    p >>= 1;
    if (p > 0) base = base * base;
  }
  return result;
}

inline Jet sin(const Jet& a) { return a.compose(detail::sin_cos_series(a.value(), a.order(), false)); }
inline Jet cos(const Jet& a) { return a.compose(detail::sin_cos_series(a.value(), a.order(), true)); }
inline Jet sinh(const Jet& a) { return a.compose(detail::sinh_cosh_series(a.value(), a.order(), false)); }
inline Jet cosh(const Jet& a) { return a.compose(detail::sinh_cosh_series(a.value(), a.order(), true)); }

inline Jet tan(const Jet& a) {
  const int k = a.order();
  const auto c = detail::sin_cos_series(a.value(), k, true);
  if (c[0] == 0.0) throw DomainError("tan at a pole");
  return a.compose(detail::series_div(detail::sin_cos_series(a.value(), k, false), c));
}

inline Jet tanh(const Jet& a) {
  const int k = a.order();
  return a.compose(detail::series_div(detail::sinh_cosh_series(a.value(), k, false),
                                      detail::sinh_cosh_series(a.value(), k, true)));
}

inline Jet atan(const Jet& a) {
  const int k = a.order();
  // d/dt atan(x0 + t) = 1 / (1 + (x0 + t)^2), integrated term by term
  detail::Series base(k + 1, 0.0), one(k + 1, 0.0);
  base[0] = a.value();
  if (k >= 1) base[1] = 1.0;
  one[0] = 1.0;
  auto denom = detail::series_mul(base, base);
  denom[0] += 1.0;
  const auto q = detail::series_div(one, denom);
  detail::Series s(k + 1);
  s[0] = std::atan(a.value());
  for (int m = 1; m <= k; ++m) s[m] = q[m - 1] / m;
  return a.compose(s);
}

}  // namespace yamabe
