#pragma once

// Lie derivatives of the metric, the connection and the curvature, plus the
// commutator and the geodesic-field operator, all on jets at a point.

#include <array>
#include <span>
#include <utility>

#include "yamabe/geometry/calculus.hpp"
#include "yamabe/lie/soliton.hpp"

namespace yamabe {

/// (L_V g)_ij = nabla_i V_j + nabla_j V_i with V lowered by g.
inline Tensor<Jet> lie_metric_jets(const GeometryJet& gj, const Tensor<Jet>& v) {
  const auto v_low = lower_index(v, 0, gj.g);
  const auto dv = covariant_derivative(v_low, gj.gamma);  // (i, j) = nabla_i V_j
  const int n = v.dim();
  Tensor<Jet> out(n, {Variance::Down, Variance::Down});
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      out(i, j) = dv(i, j) + dv(j, i);
      if (j != i) out(j, i) = out(i, j);
    }
  return out;
}

/// Yano's formula:
///   L_V G^h_ij = 1/2 g^{hl} [nabla_j (L_V g)_il + nabla_i (L_V g)_jl - nabla_l (L_V g)_ij].
inline Tensor<Jet> lie_christoffel_yano(const GeometryJet& gj, const Tensor<Jet>& v) {
  const auto lg = lie_metric_jets(gj, v);
  const auto dlg = covariant_derivative(lg, gj.gamma);  // (a, b, c) = nabla_a (L g)_bc
  const int n = v.dim();
  const int order = min_order(dlg);
  Tensor<Jet> low = zero_tensor(n, {Variance::Down, Variance::Down, Variance::Down}, order);
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        Jet s = dlg(j, i, l) + dlg(i, j, l) - dlg(l, i, j);
        s *= 0.5;
        low(l, i, j) = s;
        low(l, j, i) = s;
      }
  return raise_index(low, 0, gj.ginv);
}

/// L_V G^h_ij = nabla_i nabla_j V^h + R^h_{kij} V^k.
inline Tensor<Jet> lie_christoffel_direct(const GeometryJet& gj, const Tensor<Jet>& v) {
  const auto ddv = covariant_derivative(covariant_derivative(v, gj.gamma), gj.gamma);  // (i, j, h)
  const int n = v.dim();
  const int order = std::min(min_order(ddv), min_order(gj.riemann));
  Tensor<Jet> out = zero_tensor(n, {Variance::Up, Variance::Down, Variance::Down}, order);
  for (int h = 0; h < n; ++h)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Jet s = ddv(i, j, h).truncated(order);
        for (int k = 0; k < n; ++k) s.add_product(gj.riemann(h, k, i, j), v(k));
        out(h, i, j) = std::move(s);
      }
  return out;
}

/// nabla_k (L G^h_ij) - nabla_j (L G^h_ik) from a covariant derivative
/// d(k, h, i, j) = nabla_k L G^h_ij; result indexed (h, k, j, i).
template <class T>
Tensor<T> curvature_from_connection_derivative(const Tensor<T>& d) {
  const int n = d.dim();
  Tensor<T> out(n, {Variance::Up, Variance::Down, Variance::Down, Variance::Down}, d.flat(0) * 0.0);
  for (int h = 0; h < n; ++h)
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) out(h, k, j, i) = d(k, h, i, j) - d(j, h, i, k);
  return out;
}

/// L_V R^h_kji from exact jets (needs metric and V jets of order >= 3).
inline Tensor<Jet> lie_riemann_exact(const GeometryJet& gj, const Tensor<Jet>& v) {
  return curvature_from_connection_derivative(covariant_derivative(lie_christoffel_yano(gj, v), gj.gamma));
}

/// L_V R^h_kji, differentiating L_V G along each axis with a 5-point
/// fourth-order stencil of spacing h and adding the connection terms at x.
inline Tensor<double> lie_riemann_stencil(const MetricField& m, const VectorField& field, std::span<const double> x,
                                          double h, const GeometryJet& at_x) {
  const int n = m.dim();
  Tensor<double> dl(n, {Variance::Down, Variance::Up, Variance::Down, Variance::Down}, 0.0);  // (k, h, i, j)
  static constexpr std::array<double, 4> offsets{-2.0, -1.0, 1.0, 2.0};
  static constexpr std::array<double, 4> weights{1.0, -8.0, 8.0, -1.0};
  Point y(x.begin(), x.end());
  for (int k = 0; k < n; ++k) {
    for (int s = 0; s < 4; ++s) {
      y[k] = x[k] + offsets[s] * h;
      const auto gj = GeometryJet::from_metric(m.jets(y, 2));
      const auto lgam = values(lie_christoffel_yano(gj, field.jets(y, 2)));
      for (int a = 0; a < n; ++a)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) dl(k, a, i, j) += weights[s] * lgam(a, i, j) / (12.0 * h);
    }
    y[k] = x[k];
  }
  const auto gam = values(at_x.gamma);
  const auto lgam = values(lie_christoffel_yano(at_x, field.jets(x, 2)));
  for (int k = 0; k < n; ++k)
    for (int a = 0; a < n; ++a)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double s = 0.0;
          for (int l = 0; l < n; ++l)
            s += gam(a, k, l) * lgam(l, i, j) - gam(l, k, i) * lgam(a, l, j) - gam(l, k, j) * lgam(a, i, l);
          dl(k, a, i, j) += s;
        }
  return curvature_from_connection_derivative(dl);
}

/// [V1, V2]^i = V1^j d_j V2^i - V2^j d_j V1^i, one order below the inputs.
inline Tensor<Jet> commutator_jets(const Tensor<Jet>& v1, const Tensor<Jet>& v2) {
  const int n = v1.dim();
  const int order = std::min(min_order(v1), min_order(v2)) - 1;
  Tensor<Jet> out = zero_tensor(n, {Variance::Up}, order);
  for (int i = 0; i < n; ++i) {
    Jet s = zero_jet(n, order);
    for (int j = 0; j < n; ++j) {
      s.add_product(v1(j), v2(i).derivative(j));
      s.add_product(-v2(j), v1(i).derivative(j));
    }
    out(i) = std::move(s);
  }
  return out;
}

/// Box X^i = -(g^{jk} nabla_j nabla_k X^i + R^i_j X^j).
inline Tensor<Jet> box_operator_jets(const GeometryJet& gj, const Tensor<Jet>& x) {
  const auto ddx = covariant_derivative(covariant_derivative(x, gj.gamma), gj.gamma);  // (j, k, i)
  const auto ric_mixed = raise_index(gj.ricci, 0, gj.ginv);                           // R^i_j
  const int n = x.dim();
  const int order = std::min(min_order(ddx), min_order(ric_mixed));
  Tensor<Jet> out = zero_tensor(n, {Variance::Up}, order);
  for (int i = 0; i < n; ++i) {
    Jet s = zero_jet(n, order);
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) s.add_product(gj.ginv(j, k), ddx(j, k, i));
      s.add_product(ric_mixed(i, j), x(j));
    }
    out(i) = -s;
  }
  return out;
}

/// div V = nabla_i V^i.
inline Jet divergence_jet(const GeometryJet& gj, const Tensor<Jet>& v) {
  const auto dv = covariant_derivative(v, gj.gamma);
  Jet s = zero_jet(v.dim(), min_order(dv));
  for (int i = 0; i < v.dim(); ++i) s += dv(i, i);
  return s;
}

// Point-level operations.

inline Tensor<double> lie_metric(const MetricField& m, const VectorField& v, std::span<const double> x) {
  return values(lie_metric_jets(GeometryJet::from_metric(m.jets(x, 1)), v.jets(x, 1)));
}

/// L_V g - 2 (R - c) g.
inline Tensor<double> soliton_residual(const SolitonSpec& s, std::span<const double> x) {
  const auto gj = GeometryJet::from_metric(s.metric.jets(x, 2));
  auto lg = values(lie_metric_jets(gj, s.field.jets(x, 1)));
  const double factor = 2.0 * (gj.scalar.value() - s.c_at(x));
  const auto g = values(gj.g);
  for (std::size_t i = 0; i < lg.size(); ++i) lg.flat(i) -= factor * g.flat(i);
  return lg;
}

struct LieChristoffelPaths {
  Tensor<double> yano;
  Tensor<double> direct;
};

inline LieChristoffelPaths lie_christoffel(const MetricField& m, const VectorField& v, std::span<const double> x) {
  const auto gj = GeometryJet::from_metric(m.jets(x, 3));
  const auto vj = v.jets(x, 3);
  return {values(lie_christoffel_yano(gj, vj)), values(lie_christoffel_direct(gj, vj))};
}

inline Tensor<double> lie_riemann(const MetricField& m, const VectorField& v, std::span<const double> x,
                                  double spacing = 1e-2) {
  return lie_riemann_stencil(m, v, x, spacing, GeometryJet::from_metric(m.jets(x, 2)));
}

inline std::vector<double> commutator(const VectorField& v1, const VectorField& v2, std::span<const double> x) {
  const auto c = values(commutator_jets(v1.jets(x, 1), v2.jets(x, 1)));
  return {c.data().begin(), c.data().end()};
}

inline std::vector<double> box_operator(const MetricField& m, const VectorField& v, std::span<const double> x) {
  const auto b = values(box_operator_jets(GeometryJet::from_metric(m.jets(x, 2)), v.jets(x, 2)));
  return {b.data().begin(), b.data().end()};
}

}  // namespace yamabe
