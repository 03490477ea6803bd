#pragma once

// Tensor-product quadrature over a chart with the Riemannian volume element.

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "yamabe/geometry/calculus.hpp"
#include "yamabe/util/parallel.hpp"
#include "yamabe/util/sum.hpp"

namespace yamabe {

class QuadratureError : public std::runtime_error {
public:
  QuadratureError(const std::string& what, Point node) : std::runtime_error(what), node_(std::move(node)) {}
  const Point& node() const { return node_; }

private:
  Point node_;
};

struct AxisRule {
  enum class Kind { PeriodicTrapezoid, GaussLegendre };
  Kind kind = Kind::GaussLegendre;
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule on [lo, hi] (Newton iteration on P_n).
inline AxisRule gauss_legendre(int n, double lo, double hi) {
  AxisRule r;
  r.kind = AxisRule::Kind::GaussLegendre;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double mid = 0.5 * (hi + lo), half = 0.5 * (hi - lo);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // Recompute the derivative at the converged root.
    double p0 = 1.0, p1 = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    r.nodes[i] = mid - half * z;
    r.nodes[n - 1 - i] = mid + half * z;
    r.weights[i] = r.weights[n - 1 - i] = half * w;
  }
  return r;
}

/// Equispaced rule on [lo, hi) without the duplicate endpoint.
inline AxisRule periodic_trapezoid(int n, double lo, double hi) {
  AxisRule r;
  r.kind = AxisRule::Kind::PeriodicTrapezoid;
  const double h = (hi - lo) / n;
  for (int i = 0; i < n; ++i) {
    r.nodes.push_back(lo + i * h);
    r.weights.push_back(h);
  }
  return r;
}

struct QuadratureGrid {
  int dim = 0;
  int nodes_per_axis = 0;
  std::vector<AxisRule> axes;
  std::vector<Point> nodes;            // tensor product, axis 0 most significant
  std::vector<double> weights;         // product of axis weights
  std::vector<double> volume_element;  // sqrt det g at each node

  std::size_t size() const { return nodes.size(); }

  std::string describe() const {
    std::string s;
    for (int a = 0; a < dim; ++a) {
      if (a) s += " x ";
      s += std::to_string(axes[a].nodes.size());
      s += axes[a].kind == AxisRule::Kind::PeriodicTrapezoid ? " trapezoid" : " gauss-legendre";
    }
    return s;
  }
};

inline constexpr int kMinQuadratureNodes = 4;

/// Per-axis rules over the chart (periodic axes: trapezoid over the whole
/// period; bounded axes: Gauss-Legendre on [lo + margin, hi - margin]) and
/// the volume element at every node.
inline QuadratureGrid build_grid(const Chart& chart, const MetricField& m, int nodes, unsigned threads = 0) {
  if (nodes < kMinQuadratureNodes)
    throw std::invalid_argument("quadrature needs at least " + std::to_string(kMinQuadratureNodes) +
                                " nodes per axis (got " + std::to_string(nodes) + ")");
  chart.validate();
  if (m.dim() != chart.dim) throw std::invalid_argument("metric and chart dimensions differ");
  QuadratureGrid q;
  q.dim = chart.dim;
  q.nodes_per_axis = nodes;
  for (int a = 0; a < chart.dim; ++a) {
    const auto& b = chart.box[a];
    if (chart.periodic[a]) {
      q.axes.push_back(periodic_trapezoid(nodes, b.lo, b.hi));
    } else {
      const double mg = chart.quadrature_margins[a];
      q.axes.push_back(gauss_legendre(nodes, b.lo + mg, b.hi - mg));
    }
  }
  std::size_t total = 1;
  for (int a = 0; a < q.dim; ++a) total *= q.axes[a].nodes.size();
  q.nodes.resize(total);
  q.weights.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    Point x(q.dim);
    double w = 1.0;
    std::size_t rem = i;
    for (int a = q.dim - 1; a >= 0; --a) {
      const auto& ax = q.axes[a];
      const std::size_t k = rem % ax.nodes.size();
      rem /= ax.nodes.size();
      x[a] = ax.nodes[k];
      w *= ax.weights[k];
    }
    q.nodes[i] = std::move(x);
    q.weights[i] = w;
  }
  q.volume_element.resize(total);
  util::parallel_for(
      total,
      [&](std::size_t i) {
        try {
          q.volume_element[i] = sqrt_det(m, q.nodes[i]);
        } catch (const std::exception& e) {
          throw QuadratureError(std::string("volume element failed at node: ") + e.what(), q.nodes[i]);
        }
      },
      threads);
  return q;
}

/// Values of fn at every node, evaluated in parallel.
inline std::vector<double> node_values(const QuadratureGrid& q, const std::function<double(std::span<const double>)>& fn,
                                       unsigned threads = 0) {
  std::vector<double> v(q.size());
  util::parallel_for(
      q.size(),
      [&](std::size_t i) {
        try {
          v[i] = fn(q.nodes[i]);
        } catch (const std::exception& e) {
          std::string at = "(";
          for (std::size_t a = 0; a < q.nodes[i].size(); ++a) at += (a ? ", " : "") + std::to_string(q.nodes[i][a]);
          throw QuadratureError("evaluation failed at node " + at + "): " + e.what(), q.nodes[i]);
        }
      },
      threads);
  return v;
}

/// Sum of w * f * sqrt(det g) in node order (compensated).
inline double integrate_values(const QuadratureGrid& q, const std::vector<double>& f) {
  util::CompensatedSum s;
  for (std::size_t i = 0; i < q.size(); ++i) s += q.weights[i] * f[i] * q.volume_element[i];
  return s.value();
}

inline double integrate_abs_values(const QuadratureGrid& q, const std::vector<double>& f) {
  util::CompensatedSum s;
  for (std::size_t i = 0; i < q.size(); ++i) s += q.weights[i] * std::abs(f[i]) * q.volume_element[i];
  return s.value();
}

inline double integrate_scalar(const ScalarField& f, const QuadratureGrid& q, unsigned threads = 0) {
  return integrate_values(q, node_values(q, [&](std::span<const double> x) { return f(x); }, threads));
}

inline double volume(const QuadratureGrid& q) {
  return integrate_values(q, std::vector<double>(q.size(), 1.0));
}

inline std::vector<double> scalar_curvature_values(const MetricField& m, const QuadratureGrid& q, unsigned threads = 0) {
  return node_values(q, [&](std::span<const double> x) { return scalar_curvature(m, x); }, threads);
}

/// r = int R dv / int dv.
inline double average_scalar_curvature(const MetricField& m, const QuadratureGrid& q, unsigned threads = 0) {
  return integrate_values(q, scalar_curvature_values(m, q, threads)) / volume(q);
}

class DegenerateIntegral : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Relative size below which int R dv counts as zero.
inline constexpr double kDegenerateRatio = 1e-10;

/// int R^2 dv / int R dv.
inline double soliton_constant_estimate(const MetricField& m, const QuadratureGrid& q, unsigned threads = 0) {
  const auto r = scalar_curvature_values(m, q, threads);
  const double den = integrate_values(q, r);
  const double den_abs = integrate_abs_values(q, r);
  if (!(std::abs(den) > kDegenerateRatio * den_abs))
    throw DegenerateIntegral("degenerate denominator: |int R dv| = " + std::to_string(std::abs(den)) +
                             " is not above 1e-10 * int |R| dv = " + std::to_string(kDegenerateRatio * den_abs));
  std::vector<double> r2(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) r2[i] = r[i] * r[i];
  return integrate_values(q, r2) / den;
}

/// Rounding floor of a quadrature sum: N * eps * sum |w f sqrt g|.
inline double rounding_floor(const QuadratureGrid& q, const std::vector<double>& f) {
  return static_cast<double>(q.size()) * std::numeric_limits<double>::epsilon() * integrate_abs_values(q, f);
}

}  // namespace yamabe
