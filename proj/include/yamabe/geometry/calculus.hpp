#pragma once

// Pointwise tensor calculus on jets.
//
// Curvature convention:
//   R^h_{kji} = d_k G^h_{ji} - d_j G^h_{ki} + G^h_{kl} G^l_{ji} - G^h_{jl} G^l_{ki}
// stored as riemann(h, k, j, i). With it the variation of the connection
// satisfies  L_V R^h_{kji} = nabla_k (L_V G^h_{ij}) - nabla_j (L_V G^h_{ik}),
// the Ricci tensor is R_{ji} = R^h_{hji}, and the round sphere has R > 0.

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "yamabe/geometry/chart.hpp"
#include "yamabe/geometry/fields.hpp"
#include "yamabe/geometry/tensor.hpp"

namespace yamabe {

class GeometryError : public std::runtime_error {
public:
  enum class Kind { Singular, NotPositiveDefinite };
  GeometryError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

inline Jet zero_jet(int dim, int order) { return Jet::constant(dim, order, 0.0); }

inline Tensor<Jet> zero_tensor(int dim, std::vector<Variance> s, int order) {
  return Tensor<Jet>(dim, std::move(s), zero_jet(dim, order));
}

/// Inverse metric jets by Gauss-Jordan elimination without pivoting. The
/// pivots are the ratios of successive leading principal minors, so a
/// nonpositive pivot means g is not positive definite.
inline Tensor<Jet> inverse_metric(const Tensor<Jet>& g) {
  const int n = g.dim();
  const int order = min_order(g);
  std::vector<Jet> a(n * n), inv(n * n);
  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      a[i * n + j] = g(i, j).truncated(order);
      inv[i * n + j] = Jet::constant(g.dim(), order, i == j ? 1.0 : 0.0);
      scale = std::max(scale, std::abs(g(i, j).value()));
    }
  for (int p = 0; p < n; ++p) {
    const double piv = a[p * n + p].value();
    if (!(std::abs(piv) > 1e-14 * scale) || !std::isfinite(piv))
      throw GeometryError(GeometryError::Kind::Singular,
                          "singular metric: pivot " + std::to_string(p + 1) + " is " + std::to_string(piv));
    if (piv < 0.0)
      throw GeometryError(GeometryError::Kind::NotPositiveDefinite,
                          "metric not positive definite: leading minor " + std::to_string(p + 1) + " is negative");
    const Jet rp = 1.0 / a[p * n + p];
    for (int c = 0; c < n; ++c) {
      a[p * n + c] = a[p * n + c] * rp;
      inv[p * n + c] = inv[p * n + c] * rp;
    }
    for (int r = 0; r < n; ++r) {
      if (r == p) continue;
      const Jet f = a[r * n + p];
      for (int c = 0; c < n; ++c) {
        a[r * n + c] -= f * a[p * n + c];
        inv[r * n + c] -= f * inv[p * n + c];
      }
    }
  }
  Tensor<Jet> out(n, {Variance::Up, Variance::Up});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(i, j) = i <= j ? inv[i * n + j] : inv[j * n + i];
  return out;
}

/// G^h_{ij}, one order below the metric jets.
inline Tensor<Jet> christoffel_jets(const Tensor<Jet>& g, const Tensor<Jet>& ginv) {
  const int n = g.dim();
  const int order = min_order(g) - 1;
  if (order < 0) throw std::invalid_argument("Christoffel symbols need metric jets of order >= 1");
  // dg(l, i, j) = d_l g_ij
  std::vector<Jet> dg(n * n * n);
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        dg[(l * n + i) * n + j] = g(i, j).derivative(l);
        dg[(l * n + j) * n + i] = dg[(l * n + i) * n + j];
      }
  auto d = [&](int l, int i, int j) -> const Jet& { return dg[(l * n + i) * n + j]; };
  Tensor<Jet> lowered = zero_tensor(n, {Variance::Down, Variance::Down, Variance::Down}, order);
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        Jet v = d(i, j, l) + d(j, i, l) - d(l, i, j);
        v *= 0.5;
        lowered(l, i, j) = v;
        lowered(l, j, i) = v;
      }
  Tensor<Jet> gamma = zero_tensor(n, {Variance::Up, Variance::Down, Variance::Down}, order);
  for (int h = 0; h < n; ++h)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        Jet s = zero_jet(n, order);
        for (int l = 0; l < n; ++l) s.add_product(ginv(h, l), lowered(l, i, j));
        gamma(h, i, j) = s;
        gamma(h, j, i) = s;
      }
  return gamma;
}

/// R^h_{kji} as riemann(h, k, j, i), one order below the connection jets.
inline Tensor<Jet> riemann_jets(const Tensor<Jet>& gamma) {
  const int n = gamma.dim();
  const int order = min_order(gamma) - 1;
  if (order < 0) throw std::invalid_argument("curvature needs metric jets of order >= 2");
  Tensor<Jet> r = zero_tensor(n, {Variance::Up, Variance::Down, Variance::Down, Variance::Down}, order);
  for (int h = 0; h < n; ++h)
    for (int k = 0; k < n; ++k)
      for (int j = k + 1; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          Jet v = gamma(h, j, i).derivative(k) - gamma(h, k, i).derivative(j);
          for (int l = 0; l < n; ++l) {
            v.add_product(gamma(h, k, l), gamma(l, j, i));
            v.add_product(-gamma(h, j, l), gamma(l, k, i));
          }
          r(h, j, k, i) = -v;
          r(h, k, j, i) = std::move(v);
        }
  return r;
}

/// R_{ji} = R^h_{hji}.
inline Tensor<Jet> ricci_jets(const Tensor<Jet>& riem) {
  const int n = riem.dim();
  const int order = min_order(riem);
  Tensor<Jet> ric = zero_tensor(n, {Variance::Down, Variance::Down}, order);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      Jet s = zero_jet(n, order);
      for (int h = 0; h < n; ++h) s += riem(h, h, j, i);
      ric(j, i) = s;
    }
  return ric;
}

/// Full contraction g^{ij} T_ij of a (0,2) tensor.
inline Jet trace(const Tensor<Jet>& ginv, const Tensor<Jet>& t) {
  const int n = t.dim();
  Jet s = zero_jet(n, std::min(min_order(ginv), min_order(t)));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s.add_product(ginv(i, j), t(i, j));
  return s;
}

/// Covariant derivative. The derivative index is prepended as a new
/// covariant slot: result(k, a1, ..., ar) = nabla_k T_{a1...ar}.
inline Tensor<Jet> covariant_derivative(const Tensor<Jet>& t, const Tensor<Jet>& gamma) {
  const int n = t.dim();
  const int order = std::min(min_order(t) - 1, min_order(gamma));
  if (order < 0) throw std::invalid_argument("covariant derivative needs component jets of order >= 1");
  std::vector<Variance> s{Variance::Down};
  s.insert(s.end(), t.slots().begin(), t.slots().end());
  Tensor<Jet> out = zero_tensor(n, s, order);
  const int rank = t.rank();
  std::vector<int> idx(rank + 1), sub(rank);
  for (std::size_t f = 0; f < out.size(); ++f) {
    idx = out.unflatten(f);
    const int k = idx[0];
    std::copy(idx.begin() + 1, idx.end(), sub.begin());
    Jet v = t.at(sub).derivative(k).truncated(order);
    for (int slot = 0; slot < rank; ++slot) {
      const int a = sub[slot];
      for (int m = 0; m < n; ++m) {
        sub[slot] = m;
        if (t.variance(slot) == Variance::Up) v.add_product(gamma(a, k, m), t.at(sub));
        else v.add_product(-gamma(m, k, a), t.at(sub));
      }
      sub[slot] = a;
    }
    out.flat(f) = std::move(v);
  }
  return out;
}

/// Contracts `slot` with g (lowering) or g^{-1} (raising).
inline Tensor<Jet> change_variance(const Tensor<Jet>& t, int slot, const Tensor<Jet>& metric, Variance target) {
  if (t.variance(slot) == target) throw std::invalid_argument("slot already has the requested variance");
  const int n = t.dim();
  const int order = std::min(min_order(t), min_order(metric));
  auto s = t.slots();
  s[slot] = target;
  Tensor<Jet> out = zero_tensor(n, s, order);
  std::vector<int> idx;
  for (std::size_t f = 0; f < out.size(); ++f) {
    idx = out.unflatten(f);
    const int a = idx[slot];
    Jet v = zero_jet(n, order);
    for (int m = 0; m < n; ++m) {
      idx[slot] = m;
      v.add_product(metric(a, m), t.at(idx));
    }
    out.flat(f) = std::move(v);
  }
  return out;
}

inline Tensor<Jet> raise_index(const Tensor<Jet>& t, int slot, const Tensor<Jet>& ginv) {
  return change_variance(t, slot, ginv, Variance::Up);
}
inline Tensor<Jet> lower_index(const Tensor<Jet>& t, int slot, const Tensor<Jet>& g) {
  return change_variance(t, slot, g, Variance::Down);
}

inline Tensor<Jet> gradient(const Jet& f) {
  const int n = f.dim();
  Tensor<Jet> d(n, {Variance::Down});
  for (int i = 0; i < n; ++i) d(i) = f.derivative(i);
  return d;
}

/// nabla_i nabla_j f = d_i d_j f - G^k_ij d_k f.
inline Tensor<Jet> covariant_hessian(const Jet& f, const Tensor<Jet>& gamma) {
  return covariant_derivative(gradient(f), gamma);
}

/// Everything pointwise about the metric at one point, from metric jets of
/// a single order K. Quantities whose order would drop below zero are left
/// empty (has_* report availability).
struct GeometryJet {
  int order = 0;
  Tensor<Jet> g;            // order K
  Tensor<Jet> ginv;         // order K
  Tensor<Jet> gamma;        // order K-1
  Tensor<Jet> riemann;      // order K-2
  Tensor<Jet> ricci;        // order K-2
  Jet scalar;               // order K-2
  Tensor<Jet> grad_scalar;  // order K-3, nabla_i R
  Tensor<Jet> grad_scalar_up;
  Tensor<Jet> hess_scalar;  // order K-4
  Jet lap_scalar;

  bool has_curvature() const { return order >= 2; }
  bool has_scalar_gradient() const { return order >= 3; }
  bool has_scalar_hessian() const { return order >= 4; }

  static GeometryJet at(const MetricField& m, std::span<const double> x, int order = kDefaultJetOrder) {
    return from_metric(m.jets(x, order));
  }

  static GeometryJet from_metric(Tensor<Jet> g) {
    GeometryJet gj;
    gj.order = min_order(g);
    gj.g = std::move(g);
    gj.ginv = inverse_metric(gj.g);
    if (gj.order < 1) return gj;
    gj.gamma = christoffel_jets(gj.g, gj.ginv);
    if (gj.order < 2) return gj;
    gj.riemann = riemann_jets(gj.gamma);
    gj.ricci = ricci_jets(gj.riemann);
    gj.scalar = trace(gj.ginv, gj.ricci);
    if (gj.order < 3) return gj;
    gj.grad_scalar = gradient(gj.scalar);
    gj.grad_scalar_up = raise_index(gj.grad_scalar, 0, gj.ginv);
    if (gj.order < 4) return gj;
    gj.hess_scalar = covariant_hessian(gj.scalar, gj.gamma);
    gj.lap_scalar = trace(gj.ginv, gj.hess_scalar);
    return gj;
  }
};

// Point-level operations on expression fields.

inline Tensor<double> christoffel(const MetricField& m, std::span<const double> x) {
  const auto g = m.jets(x, 1);
  return values(christoffel_jets(g, inverse_metric(g)));
}

inline Tensor<double> riemann(const MetricField& m, std::span<const double> x) {
  return values(GeometryJet::at(m, x, 2).riemann);
}

inline Tensor<double> ricci(const MetricField& m, std::span<const double> x) {
  return values(GeometryJet::at(m, x, 2).ricci);
}

inline double scalar_curvature(const MetricField& m, std::span<const double> x) {
  return GeometryJet::at(m, x, 2).scalar.value();
}

inline Tensor<double> covariant_hessian_scalar(const MetricField& m, const ScalarField& f,
                                               std::span<const double> x) {
  const auto g = m.jets(x, 1);
  return values(covariant_hessian(f.jet(x, 2), christoffel_jets(g, inverse_metric(g))));
}

inline double laplacian_scalar(const MetricField& m, const ScalarField& f, std::span<const double> x) {
  const auto g = m.jets(x, 1);
  const auto ginv = inverse_metric(g);
  return trace(ginv, covariant_hessian(f.jet(x, 2), christoffel_jets(g, ginv))).value();
}

inline Tensor<double> covariant_derivative(const MetricField& m, const TensorField& t, std::span<const double> x) {
  const auto g = m.jets(x, 1);
  return values(covariant_derivative(t.jets(x, 1), christoffel_jets(g, inverse_metric(g))));
}

inline Tensor<double> raise_index(const MetricField& m, const Tensor<double>& t, int slot, std::span<const double> x) {
  const auto g = m.jets(x, 0);
  Tensor<Jet> tj(t.dim(), t.slots());
  for (std::size_t i = 0; i < t.size(); ++i) tj.flat(i) = Jet::constant(t.dim(), 0, t.flat(i));
  return values(raise_index(tj, slot, inverse_metric(g)));
}

inline Tensor<double> lower_index(const MetricField& m, const Tensor<double>& t, int slot, std::span<const double> x) {
  const auto g = m.jets(x, 0);
  Tensor<Jet> tj(t.dim(), t.slots());
  for (std::size_t i = 0; i < t.size(); ++i) tj.flat(i) = Jet::constant(t.dim(), 0, t.flat(i));
  return values(lower_index(tj, slot, g));
}

/// Leading principal minors of g(x), all positive iff g(x) is positive definite.
inline std::vector<double> leading_minors(const MetricField& m, std::span<const double> x) {
  const auto g = values(m.jets(x, 0));
  const int n = g.dim();
  std::vector<double> a(g.data().begin(), g.data().end()), minors;
  double det = 1.0;
  for (int p = 0; p < n; ++p) {
    const double piv = a[p * n + p];
    det *= piv;
    minors.push_back(det);
    if (piv == 0.0) break;
    for (int r = p + 1; r < n; ++r) {
      const double f = a[r * n + p] / piv;
      for (int c = p; c < n; ++c) a[r * n + c] -= f * a[p * n + c];
    }
  }
  return minors;
}

/// Throws GeometryError naming the first sample where g fails to be
/// positive definite.
inline void check_positive_definite(const MetricField& m, std::span<const Point> samples) {
  for (const auto& x : samples) {
    const auto minors = leading_minors(m, x);
    for (std::size_t k = 0; k < minors.size(); ++k)
      if (!(minors[k] > 0.0)) {
        std::string at;
        for (double v : x) at += (at.empty() ? "" : ", ") + std::to_string(v);
        throw GeometryError(GeometryError::Kind::NotPositiveDefinite,
                            "metric not positive definite at (" + at + "): leading minor " +
                                std::to_string(k + 1) + " = " + std::to_string(minors[k]));
      }
  }
}

inline double sqrt_det(const MetricField& m, std::span<const double> x) {
  const auto minors = leading_minors(m, x);
  const double det = minors.back();
  if (!(det > 0.0)) throw GeometryError(GeometryError::Kind::NotPositiveDefinite, "nonpositive metric determinant");
  return std::sqrt(det);
}

}  // namespace yamabe
