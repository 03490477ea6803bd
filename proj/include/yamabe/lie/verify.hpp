#pragma once

// Grid verifiers for the soliton identities. Each verifier evaluates a
// pointwise residual at every grid point (in parallel, written to per-point
// slots) and reduces in index order, so reports do not depend on the
// thread count.

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "yamabe/lie/lie.hpp"
#include "yamabe/lie/report.hpp"
#include "yamabe/util/parallel.hpp"

namespace yamabe {

struct VerifyOptions {
  double tol_exact = 1e-7;    // jet-exact identities
  double tol_stencil = 1e-6;  // identities using the finite-difference stencil
  double stencil_spacing = 1e-2;
  bool measure_convergence = true;
  unsigned threads = 0;  // 0: util::default_thread_count()
};

/// Jets of everything a soliton identity needs at one point.
struct SolitonPoint {
  GeometryJet geo;
  Tensor<Jet> v;
  Jet c;
  Jet s;  // R - c

  static SolitonPoint at(const SolitonSpec& spec, std::span<const double> x, int order = kDefaultJetOrder) {
    SolitonPoint p;
    p.geo = GeometryJet::at(spec.metric, x, order);
    p.v = spec.field.jets(x, order);
    p.c = spec.c_jet(x, order);
    p.s = p.geo.scalar - p.c;
    return p;
  }

  int dim() const { return geo.g.dim(); }

  /// nabla_i (R - c).
  Tensor<Jet> grad_s() const { return gradient(s); }
  /// nabla_i nabla_j (R - c).
  Tensor<Jet> hess_s() const { return covariant_hessian(s, geo.gamma); }
};

namespace detail {

struct PointOutcome {
  std::vector<PointResidual> entries;
  std::vector<double> metrics;
  std::string error;
};

inline double residual_norm(const Tensor<double>& lhs, const Tensor<double>& rhs, PointResidual& out) {
  out.abs = max_abs(lhs - rhs);
  out.scale = std::max(max_abs(lhs), max_abs(rhs));
  return out.abs;
}

inline std::string point_text(std::span<const double> x) {
  std::string s = "(";
  for (std::size_t i = 0; i < x.size(); ++i) s += (i ? ", " : "") + std::to_string(x[i]);
  return s + ")";
}

/// Runs fn over every point. Entry stats are reduced in point order and
/// metrics by max.
inline IdentityResidualReport run_grid(std::string id, std::string subject, const Chart& chart, const SampleGrid& grid,
                                       const std::vector<std::pair<std::string, std::pair<double, bool>>>& entries,
                                       const std::vector<std::string>& metric_names,
                                       const std::function<void(std::span<const double>, PointOutcome&)>& fn,
                                       unsigned threads) {
  const auto pts = grid.points(chart);
  std::vector<PointOutcome> out(pts.size());
  util::parallel_for(
      pts.size(),
      [&](std::size_t i) {
        auto& o = out[i];
        o.entries.assign(entries.size(), PointResidual{std::numeric_limits<double>::quiet_NaN(), 1.0});
        o.metrics.assign(metric_names.size(), std::numeric_limits<double>::quiet_NaN());
        try {
          fn(pts[i], o);
        } catch (const std::exception& e) {
          o.error = point_text(pts[i]) + ": " + e.what();
          for (auto& r : o.entries) r.abs = std::numeric_limits<double>::quiet_NaN();
        }
      },
      threads);

  IdentityResidualReport rep;
  rep.id = std::move(id);
  rep.subject = std::move(subject);
  rep.grid = grid.describe();
  rep.points = pts.size();
  for (const auto& o : out)
    if (!o.error.empty()) {
      ++rep.failed_points;
      if (rep.failures.size() < 5) rep.failures.push_back(o.error);
    }
  for (std::size_t e = 0; e < entries.size(); ++e) {
    std::vector<PointResidual> col(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) col[i] = out[i].entries[e];
    rep.entries.push_back(reduce_residuals(entries[e].first, col, entries[e].second.first, entries[e].second.second));
  }
  for (std::size_t m = 0; m < metric_names.size(); ++m) {
    double mx = std::numeric_limits<double>::quiet_NaN();
    for (const auto& o : out) {
      const double v = o.metrics[m];
      if (std::isnan(v)) continue;
      mx = std::isnan(mx) ? v : std::max(mx, v);
    }
    rep.metrics.emplace_back(metric_names[m], mx);
  }
  rep.finalize();
  return rep;
}

}  // namespace detail

/// Tolerance of the soliton-equation check used for claimed-valid specs.
inline constexpr double kSolitonTolerance = 1e-8;

inline IdentityResidualReport verify_soliton(const SolitonSpec& s, const SampleGrid& grid,
                                             double tol = kSolitonTolerance, unsigned threads = 0) {
  return detail::run_grid(
      "soliton", s.name, s.chart, grid, {{"L_V g - 2(R-c)g", {tol, false}}}, {},
      [&](std::span<const double> x, detail::PointOutcome& o) {
        const auto gj = GeometryJet::at(s.metric, x, 2);
        const auto lg = values(lie_metric_jets(gj, s.field.jets(x, 1)));
        auto rhs = values(gj.g);
        const double f = 2.0 * (gj.scalar.value() - s.c_at(x));
        for (auto& v : rhs.data()) v *= f;
        detail::residual_norm(lg, rhs, o.entries[0]);
      },
      threads);
}

// Pointwise pieces of the lemma checks, exposed for tests.

/// Right side of L_V G^h_ij = nabla_j S d^h_i + nabla_i S d^h_j - nabla^h S g_ij, S = R - c.
inline Tensor<double> lemma21_i_rhs(const SolitonPoint& p) {
  const int n = p.dim();
  const auto ds = values(p.grad_s());
  const auto ds_up = values(raise_index(p.grad_s(), 0, p.geo.ginv));
  const auto g = values(p.geo.g);
  Tensor<double> r(n, {Variance::Up, Variance::Down, Variance::Down}, 0.0);
  for (int h = 0; h < n; ++h)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        r(h, i, j) = (h == i ? ds(j) : 0.0) + (h == j ? ds(i) : 0.0) - ds_up(h) * g(i, j);
  return r;
}

/// (nabla_k nabla_i S) d^h_j - (nabla_j nabla_i S) d^h_k + (nabla_j nabla^h S) g_ik - (nabla_k nabla^h S) g_ij.
inline Tensor<double> lemma21_ii_rhs(const SolitonPoint& p) {
  const int n = p.dim();
  const auto hj = p.hess_s();
  const auto hs = values(hj);
  const auto hs_up = values(raise_index(hj, 1, p.geo.ginv));  // (a, h) = nabla_a nabla^h S
  const auto g = values(p.geo.g);
  Tensor<double> r(n, {Variance::Up, Variance::Down, Variance::Down, Variance::Down}, 0.0);
  for (int h = 0; h < n; ++h)
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
          r(h, k, j, i) = (h == j ? hs(k, i) : 0.0) - (h == k ? hs(j, i) : 0.0) + hs_up(j, h) * g(i, k) -
                          hs_up(k, h) * g(i, j);
  return r;
}

/// L_V R_ji = L_V R^h_hji.
inline Tensor<double> contract_lie_riemann(const Tensor<double>& lr) {
  const int n = lr.dim();
  Tensor<double> r(n, {Variance::Down, Variance::Down}, 0.0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      for (int h = 0; h < n; ++h) r(j, i) += lr(h, h, j, i);
  return r;
}

struct RicciCandidates {
  Tensor<double> literal;  // component reading of the printed formula
  Tensor<double> derived;  // (2 - n) nabla_i nabla_j S - Delta S g_ij
};

inline RicciCandidates lemma21_iii_candidates(const SolitonPoint& p) {
  const int n = p.dim();
  const auto hj = p.hess_s();
  const auto hs = values(hj);
  const auto gi = values(p.geo.ginv);
  const auto g = values(p.geo.g);
  const double lap = trace(p.geo.ginv, hj).value();
  RicciCandidates c{Tensor<double>(n, {Variance::Down, Variance::Down}, 0.0),
                    Tensor<double>(n, {Variance::Down, Variance::Down}, 0.0)};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      // g^{jk} nabla_k nabla_i S and nabla_j nabla^i S taken with their
      // printed index positions, evaluated as components.
      double up_first = 0.0, up_second = 0.0;
      for (int k = 0; k < n; ++k) {
        up_first += gi(j, k) * hs(k, i);
        up_second += hs(j, k) * gi(k, i);
      }
      c.literal(i, j) = up_first - lap * g(i, j) + up_second - n * hs(j, i);
      c.derived(i, j) = (2.0 - n) * hs(i, j) - lap * g(i, j);
    }
  return c;
}

struct ScalarLieTerms {
  double lhs = 0.0;           // V^i nabla_i R
  double literal = 0.0;       // 2 (1 - n) Delta S
  double derived = 0.0;       // 2 (1 - n) Delta S - 2 R S
  double expected_gap = 0.0;  // 2 R S
};

inline ScalarLieTerms lemma21_iv_terms(const SolitonPoint& p) {
  const int n = p.dim();
  ScalarLieTerms t;
  const auto dr = gradient(p.geo.scalar);
  for (int i = 0; i < n; ++i) t.lhs += p.v(i).value() * dr(i).value();
  const double lap = trace(p.geo.ginv, p.hess_s()).value();
  const double r = p.geo.scalar.value();
  const double s = p.s.value();
  t.literal = 2.0 * (1 - n) * lap;
  t.expected_gap = 2.0 * r * s;
  t.derived = t.literal - t.expected_gap;
  return t;
}

inline IdentityResidualReport verify_lemma21_i(const SolitonSpec& s, const SampleGrid& grid,
                                               const VerifyOptions& opt = {}) {
  return detail::run_grid(
      "lemma21.i", s.name, s.chart, grid,
      {{"yano", {opt.tol_exact, false}}, {"path A vs path B", {opt.tol_exact, false}}},
      {"max |L_V Gamma|", "max |grad (R-c)|"},
      [&](std::span<const double> x, detail::PointOutcome& o) {
        const auto p = SolitonPoint::at(s, x);
        const auto a = values(lie_christoffel_yano(p.geo, p.v));
        const auto b = values(lie_christoffel_direct(p.geo, p.v));
        detail::residual_norm(a, lemma21_i_rhs(p), o.entries[0]);
        detail::residual_norm(a, b, o.entries[1]);
        o.metrics[0] = max_abs(a);
        o.metrics[1] = max_abs(values(p.grad_s()));
      },
      opt.threads);
}

inline IdentityResidualReport verify_lemma21_ii(const SolitonSpec& s, const SampleGrid& grid,
                                                const VerifyOptions& opt = {}) {
  const double h = opt.stencil_spacing;
  auto rep = detail::run_grid(
      "lemma21.ii", s.name, s.chart, grid,
      {{"stencil", {opt.tol_stencil, false}}, {"exact-jet", {opt.tol_exact, false}}},
      {"stencil error h", "stencil error 2h", "max |L_V Riem|"},
      [&](std::span<const double> x, detail::PointOutcome& o) {
        const auto p = SolitonPoint::at(s, x);
        const auto rhs = lemma21_ii_rhs(p);
        const auto exact = values(lie_riemann_exact(p.geo, p.v));
        const auto st = lie_riemann_stencil(s.metric, s.field, x, h, p.geo);
        detail::residual_norm(st, rhs, o.entries[0]);
        detail::residual_norm(exact, rhs, o.entries[1]);
        o.metrics[0] = max_abs(st - exact);
        if (opt.measure_convergence)
          o.metrics[1] = max_abs(lie_riemann_stencil(s.metric, s.field, x, 2 * h, p.geo) - exact);
        o.metrics[2] = max_abs(exact);
      },
      opt.threads);
  if (opt.measure_convergence) {
    const double e1 = rep.metric("stencil error h");
    const double e2 = rep.metric("stencil error 2h");
    const double scale = std::max(1.0, rep.metric("max |L_V Riem|"));
    // Below this the stencil error is rounding, not truncation.
    const double floor = 1e-10 * scale;
    double order = std::numeric_limits<double>::quiet_NaN();
    if (e2 > floor && e1 > 0.0) order = std::log2(e2 / e1);
    rep.metrics.emplace_back("convergence order", order);
    rep.metrics.emplace_back("rounding dominated", e2 <= floor ? 1.0 : 0.0);
    // Observed order, judged at two decimals.
    if (!(e2 <= floor || std::round(order * 100.0) / 100.0 >= 4.0)) rep.pass = false;
  }
  return rep;
}

inline IdentityResidualReport verify_lemma21_iii(const SolitonSpec& s, const SampleGrid& grid,
                                                 const VerifyOptions& opt = {}) {
  return detail::run_grid(
      "lemma21.iii", s.name, s.chart, grid,
      {{"paper-literal", {opt.tol_stencil, true}}, {"contraction-derived", {opt.tol_stencil, false}}},
      {"max |L_V Ric|"},
      [&](std::span<const double> x, detail::PointOutcome& o) {
        const auto p = SolitonPoint::at(s, x);
        const auto lhs = contract_lie_riemann(lie_riemann_stencil(s.metric, s.field, x, opt.stencil_spacing, p.geo));
        const auto cand = lemma21_iii_candidates(p);
        detail::residual_norm(lhs, cand.literal, o.entries[0]);
        detail::residual_norm(lhs, cand.derived, o.entries[1]);
        o.metrics[0] = max_abs(lhs);
      },
      opt.threads);
}

inline IdentityResidualReport verify_lemma21_iv(const SolitonSpec& s, const SampleGrid& grid,
                                                const VerifyOptions& opt = {}) {
  auto one = [](double v) {
    Tensor<double> t(1, {}, 0.0);
    t.flat(0) = v;
    return t;
  };
  return detail::run_grid(
      "lemma21.iv", s.name, s.chart, grid,
      {{"paper-literal", {opt.tol_exact, true}},
       {"contraction-derived", {opt.tol_exact, false}},
       {"literal gap = 2R(R-c)", {opt.tol_exact, false}}},
      {"max |V(R)|", "max |2R(R-c)|"},
      [&](std::span<const double> x, detail::PointOutcome& o) {
        const auto t = lemma21_iv_terms(SolitonPoint::at(s, x));
        detail::residual_norm(one(t.lhs), one(t.literal), o.entries[0]);
        detail::residual_norm(one(t.lhs), one(t.derived), o.entries[1]);
        detail::residual_norm(one(t.literal - t.lhs), one(t.expected_gap), o.entries[2]);
        o.metrics[0] = std::abs(t.lhs);
        o.metrics[1] = std::abs(t.expected_gap);
      },
      opt.threads);
}

/// Box V against (n - 2) nabla^h (R - c).
inline IdentityResidualReport verify_geodesic_identity(const SolitonSpec& s, const SampleGrid& grid,
                                                       const VerifyOptions& opt = {}) {
  return detail::run_grid(
      "geodesic", s.name, s.chart, grid, {{"box V - (n-2) grad(R-c)", {opt.tol_exact, false}}},
      {"max |box V|", "max |grad R|", "max |grad (R-c)|"},
      [&](std::span<const double> x, detail::PointOutcome& o) {
        const auto p = SolitonPoint::at(s, x);
        const int n = p.dim();
        const auto box = values(box_operator_jets(p.geo, p.v));
        const auto rhs = (n - 2.0) * values(raise_index(p.grad_s(), 0, p.geo.ginv));
        detail::residual_norm(box, rhs, o.entries[0]);
        auto norm = [&](const Tensor<Jet>& covector) {
          const auto up = values(raise_index(covector, 0, p.geo.ginv));
          double s2 = 0.0;
          for (int i = 0; i < n; ++i) s2 += up(i) * covector(i).value();
          return std::sqrt(std::max(s2, 0.0));
        };
        o.metrics[0] = max_abs(box);
        o.metrics[1] = norm(gradient(p.geo.scalar));
        o.metrics[2] = norm(p.grad_s());
      },
      opt.threads);
}

/// Homothety of V1 - V2 and the Killing property of [V1, V2] for two
/// solitons on one metric.
inline IdentityResidualReport verify_commutator_killing(const SolitonSpec& s1, const SolitonSpec& s2,
                                                        const SampleGrid& grid, double tol = 1e-10,
                                                        unsigned threads = 0) {
  if (!same_metric(s1.metric, s2.metric))
    throw std::invalid_argument("commutator check needs two solitons on the same metric (" + s1.name + ", " +
                                s2.name + ")");
  return detail::run_grid(
      "commutator", s1.name + " vs " + s2.name, s1.chart, grid,
      {{"L_(V1-V2) g - 2(c2-c1) g", {tol, false}}, {"L_[V1,V2] g", {tol, false}}}, {"max |[V1,V2]|"},
      [&](std::span<const double> x, detail::PointOutcome& o) {
        const auto geo = GeometryJet::at(s1.metric, x, 2);
        const auto v1 = s1.field.jets(x, 2);
        const auto v2 = s2.field.jets(x, 2);
        Tensor<Jet> diff(v1.dim(), {Variance::Up});
        for (int i = 0; i < v1.dim(); ++i) diff(i) = v1(i) - v2(i);
        const auto lg = values(lie_metric_jets(geo, diff));
        auto rhs = values(geo.g);
        const double f = 2.0 * (s2.c_at(x) - s1.c_at(x));
        for (auto& v : rhs.data()) v *= f;
        detail::residual_norm(lg, rhs, o.entries[0]);
        const auto br = commutator_jets(v1, v2);
        const auto lk = values(lie_metric_jets(geo, br));
        o.entries[1].abs = max_abs(lk);
        o.entries[1].scale = 1.0;
        o.metrics[0] = max_abs(values(br));
      },
      threads);
}

}  // namespace yamabe
