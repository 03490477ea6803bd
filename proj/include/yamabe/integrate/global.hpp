#pragma once

// Global checks: contracted soliton equation, divergence theorem, and the
// soliton-constant chain for compact solitons with R bounded below.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "yamabe/integrate/quadrature.hpp"
#include "yamabe/lie/verify.hpp"

namespace yamabe {

struct GlobalCheck {
  std::string label;
  double value = 0.0;          // signed or absolute quantity being judged
  double normalization = 0.0;  // 0 when the check is absolute
  double relative = 0.0;       // value / normalization, or value when absolute
  double error_estimate = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct GlobalReport {
  std::string id;
  std::string subject;
  std::string grid;
  int nodes = 0;             // per axis, reported resolution
  int comparison_nodes = 0;  // per axis, used for the error estimate
  std::vector<std::pair<std::string, double>> quantities;
  std::vector<GlobalCheck> checks;
  bool precondition_failed = false;
  std::vector<std::string> preconditions;  // messages of failed preconditions
  std::string soliton_type;
  bool pass = false;

  double quantity(const std::string& key) const {
    for (const auto& [k, v] : quantities)
      if (k == key) return v;
    throw std::out_of_range("report " + id + " has no quantity '" + key + "'");
  }

  const GlobalCheck& check(const std::string& label) const {
    for (const auto& c : checks)
      if (c.label == label) return c;
    throw std::out_of_range("report " + id + " has no check '" + label + "'");
  }

  void finalize() {
    pass = !precondition_failed && !checks.empty();
    for (const auto& c : checks)
      if (!c.pass) pass = false;
  }
};

/// div V = nabla_i V^i at x.
inline double divergence_field(const MetricField& m, const VectorField& v, std::span<const double> x) {
  return divergence_jet(GeometryJet::at(m, x, 1), v.jets(x, 1)).value();
}

/// Pointwise div V - n (R - c).
inline IdentityResidualReport verify_contracted_soliton(const SolitonSpec& s, const SampleGrid& grid, double tol = 1e-8,
                                                        unsigned threads = 0) {
  return detail::run_grid(
      "contracted", s.name, s.chart, grid, {{"div V - n(R-c)", {tol, false}}}, {"max |div V|"},
      [&](std::span<const double> x, detail::PointOutcome& o) {
        const auto gj = GeometryJet::at(s.metric, x, 2);
        const double div = divergence_jet(gj, s.field.jets(x, 2)).value();
        const double rhs = gj.g.dim() * (gj.scalar.value() - s.c_at(x));
        o.entries[0] = {std::abs(div - rhs), std::max(std::abs(div), std::abs(rhs))};
        o.metrics[0] = std::abs(div);
      },
      threads);
}

namespace detail {

/// Integral of |f| sqrt(g) over the quadrature margin strips that the main
/// grid leaves out; +inf if the strip cannot be evaluated.
inline double margin_strip_estimate(const Chart& chart, const MetricField& m, int nodes,
                                    const std::function<double(std::span<const double>)>& abs_f, unsigned threads) {
  double total = 0.0;
  for (int a = 0; a < chart.dim; ++a) {
    const double mg = chart.quadrature_margins[a];
    if (chart.periodic[a] || mg <= 0.0) continue;
    for (int side = 0; side < 2; ++side) {
      Chart strip = chart;
      strip.box[a] = side == 0 ? Interval{chart.box[a].lo, chart.box[a].lo + mg}
                               : Interval{chart.box[a].hi - mg, chart.box[a].hi};
      strip.margins[a] = 0.0;
      strip.quadrature_margins[a] = 0.0;
      for (int b = 0; b < chart.dim; ++b)
        if (b != a) strip.margins[b] = 0.0;
      try {
        const auto q = build_grid(strip, m, std::max(nodes / 4, kMinQuadratureNodes), threads);
        total += integrate_abs_values(q, node_values(q, abs_f, threads));
      } catch (const std::exception&) {
        return std::numeric_limits<double>::infinity();
      }
    }
  }
  return total;
}

struct DivergenceNode {
  double div = 0.0, div_rv = 0.0, eq27 = 0.0, r_v = 0.0;
};

inline DivergenceNode divergence_node(const MetricField& m, const VectorField& v, std::span<const double> x) {
  const auto gj = GeometryJet::at(m, x, 3);
  const auto vj = v.jets(x, 2);
  const int n = vj.dim();
  DivergenceNode d;
  d.div = divergence_jet(gj, vj).value();
  Tensor<Jet> rv(n, {Variance::Up});
  for (int i = 0; i < n; ++i) rv(i) = gj.scalar * vj(i);
  d.div_rv = divergence_jet(gj, rv).value();
  const double r = gj.scalar.value();
  double v_dr = 0.0, vv = 0.0;
  const auto g = values(gj.g);
  for (int i = 0; i < n; ++i) {
    v_dr += vj(i).value() * gj.grad_scalar(i).value();
    for (int j = 0; j < n; ++j) vv += g(i, j) * vj(i).value() * vj(j).value();
  }
  d.eq27 = v_dr + r * d.div;
  d.r_v = std::abs(r) * std::sqrt(std::max(vv, 0.0));
  return d;
}

inline GlobalCheck make_check(std::string label, double value, double norm, double err, double tol) {
  GlobalCheck c;
  c.label = std::move(label);
  c.value = value;
  c.normalization = norm;
  c.relative = norm > 0.0 ? value / norm : value;
  c.error_estimate = err;
  c.tolerance = tol;
  c.pass = std::abs(c.relative) < tol;
  return c;
}

}  // namespace detail

struct VolumeEstimate {
  double value = 0.0;
  double error_estimate = 0.0;  // two-resolution difference + margin strips + rounding floor
  std::string grid;
};

inline VolumeEstimate estimate_volume(const Chart& chart, const MetricField& m, int nodes, unsigned threads = 0) {
  const auto q1 = build_grid(chart, m, nodes, threads);
  const auto q2 = build_grid(chart, m, 2 * nodes, threads);
  const std::vector<double> ones(q1.size(), 1.0);
  VolumeEstimate v;
  v.value = volume(q1);
  v.grid = q1.describe();
  v.error_estimate = std::abs(v.value - volume(q2)) +
                     detail::margin_strip_estimate(chart, m, nodes, [](std::span<const double>) { return 1.0; }, threads) +
                     rounding_floor(q1, ones);
  return v;
}

inline constexpr double kDivergenceTolerance = 1e-8;

/// |int div V|, |int div(RV)| and |int [g(grad R, V) + R div V]| over a closed
/// chart, each normalized by the integral of the absolute integrand
/// (|R||V| for the last), with a two-resolution error estimate.
inline GlobalReport verify_divergence_theorem(const Chart& chart, const MetricField& m, const VectorField& v,
                                              int nodes, double tol = kDivergenceTolerance, unsigned threads = 0,
                                              std::string subject = {}) {
  GlobalReport rep;
  rep.id = "divergence";
  rep.subject = std::move(subject);
  rep.nodes = nodes;
  rep.comparison_nodes = 2 * nodes;
  struct Sums {
    double div, div_rv, eq27, abs_div, abs_div_rv, r_v, floor_div, floor_div_rv, floor_eq27;
  };
  auto run = [&](int n, std::string* grid_text) {
    const auto q = build_grid(chart, m, n, threads);
    if (grid_text) *grid_text = q.describe();
    std::vector<detail::DivergenceNode> d(q.size());
    util::parallel_for(
        q.size(),
        [&](std::size_t i) {
          try {
            d[i] = detail::divergence_node(m, v, q.nodes[i]);
          } catch (const std::exception& e) {
            throw QuadratureError(std::string("divergence integrand failed: ") + e.what(), q.nodes[i]);
          }
        },
        threads);
    std::vector<double> a(q.size()), b(q.size()), c(q.size()), rv(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
      a[i] = d[i].div;
      b[i] = d[i].div_rv;
      c[i] = d[i].eq27;
      rv[i] = d[i].r_v;
    }
    return Sums{integrate_values(q, a),     integrate_values(q, b),     integrate_values(q, c),
                integrate_abs_values(q, a), integrate_abs_values(q, b), integrate_values(q, rv),
                rounding_floor(q, a),       rounding_floor(q, b),       rounding_floor(q, c)};
  };
  const Sums s = run(nodes, &rep.grid);
  const Sums f = run(2 * nodes, nullptr);
  auto strip = [&](auto pick) {
    return detail::margin_strip_estimate(
        chart, m, nodes, [&](std::span<const double> x) { return std::abs(pick(detail::divergence_node(m, v, x))); },
        threads);
  };
  const double strip_div = strip([](const detail::DivergenceNode& d) { return d.div; });
  const double strip_rv = strip([](const detail::DivergenceNode& d) { return d.div_rv; });
  const double strip_27 = strip([](const detail::DivergenceNode& d) { return d.eq27; });
  rep.checks.push_back(detail::make_check("int div V", std::abs(s.div), s.abs_div,
                                          std::abs(s.div - f.div) + strip_div + s.floor_div, tol));
  rep.checks.push_back(detail::make_check("int div(RV)", std::abs(s.div_rv), s.abs_div_rv,
                                          std::abs(s.div_rv - f.div_rv) + strip_rv + s.floor_div_rv, tol));
  rep.checks.push_back(detail::make_check("int g(grad R, V) + R div V", std::abs(s.eq27), s.r_v,
                                          std::abs(s.eq27 - f.eq27) + strip_27 + s.floor_eq27, tol));
  rep.quantities = {{"int |div V| dv", s.abs_div}, {"int |div(RV)| dv", s.abs_div_rv}, {"int |R||V| dv", s.r_v}};
  rep.finalize();
  return rep;
}

/// Label by the sign of c: c < 0 shrinking, c = 0 steady, c > 0 expanding.
inline std::string soliton_type(double c, double tol) {
  if (std::abs(c) <= tol) return "steady";
  return c > 0 ? "expanding" : "shrinking";
}

struct Theorem22Options {
  int nodes = 32;
  std::optional<double> alpha;  // default: min R over the nodes
  double tol = 1e-6;
  unsigned threads = 0;
};

/// Soliton-constant chain on a compact chart. `spec` may be null for a bare
/// metric; then only c_estimate and the bound are checked.
inline GlobalReport verify_theorem22(const Chart& chart, const MetricField& m, const SolitonSpec* spec,
                                     const std::string& subject, const Theorem22Options& opt = {}) {
  GlobalReport rep;
  rep.id = "theorem22";
  rep.subject = subject;
  rep.nodes = opt.nodes;
  rep.comparison_nodes = 2 * opt.nodes;
  if (opt.alpha && !(*opt.alpha > 0.0)) throw std::invalid_argument("alpha must be positive");

  const auto q1 = build_grid(chart, m, opt.nodes, opt.threads);
  const auto q2 = build_grid(chart, m, 2 * opt.nodes, opt.threads);
  rep.grid = q1.describe();
  const auto r1 = scalar_curvature_values(m, q1, opt.threads);
  const auto r2 = scalar_curvature_values(m, q2, opt.threads);
  double min_r = std::numeric_limits<double>::infinity();
  for (double v : r1) min_r = std::min(min_r, v);
  for (double v : r2) min_r = std::min(min_r, v);
  const double alpha = opt.alpha.value_or(min_r);
  const double vol = volume(q1);
  const double int_r = integrate_values(q1, r1);
  const double int_abs_r = integrate_abs_values(q1, r1);
  rep.quantities = {{"volume", vol}, {"r", int_r / vol}, {"min R", min_r}, {"alpha", alpha}, {"int R dv", int_r}};

  if (!(alpha > 0.0))
    rep.preconditions.push_back("R is not bounded below by a positive constant (min R = " + std::to_string(min_r) + ")");
  else if (min_r < alpha)
    rep.preconditions.push_back("min R = " + std::to_string(min_r) + " is below alpha = " + std::to_string(alpha));
  if (!(std::abs(int_r) > kDegenerateRatio * int_abs_r))
    rep.preconditions.push_back("degenerate denominator: int R dv = " + std::to_string(int_r));
  if (!rep.preconditions.empty()) {
    rep.precondition_failed = true;
    rep.finalize();
    return rep;
  }

  auto estimate = [&](const QuadratureGrid& q, const std::vector<double>& r) {
    std::vector<double> sq(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) sq[i] = r[i] * r[i];
    return integrate_values(q, sq) / integrate_values(q, r);
  };
  const double c1 = estimate(q1, r1);
  const double c2 = estimate(q2, r2);
  const double strip =
      detail::margin_strip_estimate(chart, m, opt.nodes,
                                    [&](std::span<const double> x) { return std::abs(scalar_curvature(m, x)); },
                                    opt.threads);
  const double err = std::abs(c1 - c2) + std::max(1.0, std::abs(c1)) * strip / std::abs(int_r) +
                     rounding_floor(q1, r1) / std::abs(int_r);
  rep.quantities.emplace_back("c_estimate", c1);
  rep.quantities.emplace_back("c_estimate error", err);

  GlobalCheck bound;
  bound.label = "c_estimate >= alpha";
  bound.value = c1 - alpha;
  bound.relative = bound.value;
  bound.error_estimate = err;
  bound.tolerance = opt.tol;
  bound.pass = c1 >= alpha - opt.tol;
  rep.checks.push_back(bound);

  double c_label = c1;
  if (spec && spec->kind() == SolitonSpec::Kind::Soliton) {
    const double c = std::get<double>(spec->c);
    rep.quantities.emplace_back("declared c", c);
    rep.checks.push_back(detail::make_check("|c_estimate - c|", std::abs(c1 - c), 0.0, err, opt.tol));
    c_label = c;
  }
  if (spec) {
    // The chain: contracted soliton equation at the nodes, then the
    // divergence-theorem identity for the soliton field.
    const auto n = static_cast<double>(chart.dim);
    const auto res = node_values(
        q1,
        [&](std::span<const double> x) {
          const auto gj = GeometryJet::at(m, x, 2);
          const double div = divergence_jet(gj, spec->field.jets(x, 2)).value();
          const double rhs = n * (gj.scalar.value() - spec->c_at(x));
          return std::abs(div - rhs) / std::max({std::abs(div), std::abs(rhs), 1.0});
        },
        opt.threads);
    rep.checks.push_back(
        detail::make_check("div V - n(R-c)", *std::max_element(res.begin(), res.end()), 0.0, 0.0, kSolitonTolerance));
    const auto dt = verify_divergence_theorem(chart, m, spec->field, opt.nodes, kDivergenceTolerance, opt.threads);
    rep.checks.push_back(dt.check("int g(grad R, V) + R div V"));
  }
  rep.soliton_type = soliton_type(c_label, opt.tol);
  rep.finalize();
  return rep;
}

inline GlobalReport verify_theorem22(const SolitonSpec& s, const Theorem22Options& opt = {}) {
  return verify_theorem22(s.chart, s.metric, &s, s.name, opt);
}

}  // namespace yamabe
