#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "support/oracles.hpp"
#include "yamabe/catalog/catalog.hpp"
#include "yamabe/lie/verify.hpp"

using namespace yamabe;
using Catch::Approx;

namespace {

// Time-t flow of V by RK4 with the scalar evaluator.
Point flow_map(const VectorField& v, Point x, double t, int substeps = 8) {
  const double h = t / substeps;
  const int n = v.dim();
  auto f = [&](const Point& p) { return v(p); };
  for (int s = 0; s < substeps; ++s) {
    const auto k1 = f(x);
    Point y(n);
    for (int i = 0; i < n; ++i) y[i] = x[i] + 0.5 * h * k1[i];
    const auto k2 = f(y);
    for (int i = 0; i < n; ++i) y[i] = x[i] + 0.5 * h * k2[i];
    const auto k3 = f(y);
    for (int i = 0; i < n; ++i) y[i] = x[i] + h * k3[i];
    const auto k4 = f(y);
    for (int i = 0; i < n; ++i) x[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  }
  return x;
}

// (phi_t^* g)_ij(x) with the Jacobian of the flow map by central differences.
std::vector<double> pullback_metric(const MetricField& m, const VectorField& v, const Point& x, double t) {
  const int n = m.dim();
  const double d = 1e-4;
  std::vector<double> jac(n * n);  // jac[a*n + i] = d phi^a / d x^i
  for (int i = 0; i < n; ++i) {
    Point xp = x, xm = x;
    xp[i] += d;
    xm[i] -= d;
    const auto p = flow_map(v, xp, t), q = flow_map(v, xm, t);
    for (int a = 0; a < n; ++a) jac[a * n + i] = (p[a] - q[a]) / (2 * d);
  }
  const auto y = flow_map(v, x, t);
  std::vector<double> out(n * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) out[i * n + j] += eval(m.component(a, b), y) * jac[a * n + i] * jac[b * n + j];
  return out;
}

// d/dt phi_t^* g at t = 0, two-sided with eps = 1e-4.
std::vector<double> flow_lie_metric(const MetricField& m, const VectorField& v, const Point& x) {
  const double eps = 1e-4;
  const auto p = pullback_metric(m, v, x, eps), q = pullback_metric(m, v, x, -eps);
  std::vector<double> out(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) out[k] = (p[k] - q[k]) / (2 * eps);
  return out;
}

Tensor<double> identity_times(int n, double s) {
  Tensor<double> t(n, {Variance::Down, Variance::Down}, 0.0);
  for (int i = 0; i < n; ++i) t(i, i) = s;
  return t;
}

using Matrix = std::vector<std::vector<double>>;

VectorField linear_field(const Matrix& m) { return catalog_detail::linear_field(m); }

Matrix random_soliton_matrix(oracle::Uniform& u, int n, double a) {
  Matrix m(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    m[i][i] = a;
    for (int j = i + 1; j < n; ++j) {
      const double w = u(-1, 1);
      m[i][j] = w;
      m[j][i] = -w;
    }
  }
  return m;
}

SolitonSpec euclidean_spec(const CatalogEntry& e, const Matrix& m, double a) {
  SolitonSpec s;
  s.name = "random";
  s.chart = e.chart;
  s.metric = e.metric;
  s.field = linear_field(m);
  s.c = -a;
  return s;
}

}  // namespace

TEST_CASE("lie_metric examples", "[lie]") {
  const auto e = catalog_get("euclidean");
  const Point x{0.3, -0.7};
  CHECK(max_abs(lie_metric(e.metric, VectorField::parse({"x1", "x2"}, 2), x) - identity_times(2, 2.0)) == 0.0);
  CHECK(max_abs(lie_metric(e.metric, VectorField::parse({"-x2", "x1"}, 2), x)) == 0.0);
  const auto c = catalog_get("cigar");
  for (const auto& p : SampleGrid::random(100, 1).points(c.chart)) {
    const auto lg = lie_metric(c.metric, c.default_spec().field, p);
    const double r = scalar_curvature(c.metric, p);
    const auto g = values(c.metric.jets(p, 0));
    CHECK(max_abs(lg - 2.0 * r * g) < 1e-14);
  }
}

TEST_CASE("soliton residual examples", "[lie]") {
  for (const auto& e : catalog_soliton_entries())
    for (const auto& s : e.specs) {
      INFO(e.name << " / " << s.name);
      const auto rep = verify_soliton(s, SampleGrid::random(1000));
      CHECK(rep.pass);
      CHECK(rep.entry("L_V g - 2(R-c)g").max_abs < 1e-9);
    }
  CHECK(verify_soliton(catalog_get("euclidean").spec("dilation"), SampleGrid::random(1000)).entries[0].max_abs < 1e-12);
  // A wrong constant is detected.
  auto bad = catalog_get("cigar").default_spec();
  bad.c = 0.5;
  CHECK_FALSE(verify_soliton(bad, SampleGrid::tensor(8)).pass);
}

TEST_CASE("lie_christoffel paths agree on every catalog manifold", "[lie][dual-path]") {
  oracle::Uniform u(3);
  auto ms = catalog_all();
  ms.push_back(catalog_get("round_sphere", {{"n", 3}}));
  for (const auto& m : ms) {
    const int n = m.chart.dim;
    std::vector<VectorField> fields;
    for (const auto& s : m.specs) fields.push_back(s.field);
    fields.push_back(VectorField::zero(n));
    for (int k = 0; k < 3; ++k) {
      std::vector<std::string> comps;
      for (int i = 0; i < n; ++i) comps.push_back(oracle::random_expression(u, n, 2));
      fields.push_back(VectorField::parse(comps, n));
    }
    for (const auto& v : fields)
      for (const auto& x : SampleGrid::random(40, 17).points(m.chart)) {
        INFO(m.name << " V = " << v.strings()[0]);
        const auto p = lie_christoffel(m.metric, v, x);
        const double scale = std::max({1.0, max_abs(p.yano), max_abs(p.direct)});
        CHECK(max_abs(p.yano - p.direct) / scale < 1e-8);
      }
    const auto zero = lie_christoffel(m.metric, VectorField::zero(n), SampleGrid::random(1).points(m.chart)[0]);
    CHECK(max_abs(zero.yano) == 0.0);
  }
}

TEST_CASE("first identity: connection variation", "[lie][lemma-i]") {
  for (const auto& e : catalog_soliton_entries()) {
    INFO(e.name);
    CHECK(verify_lemma21_i(e.default_spec(), SampleGrid::tensor(16)).pass);
  }
  const auto rep = verify_lemma21_i(catalog_get("cigar").default_spec(), SampleGrid::tensor(64));
  CHECK(rep.pass);
  CHECK(rep.entry("yano").max_abs < 1e-7);
  CHECK(rep.metric("max |L_V Gamma|") > 0.1);
  CHECK(verify_lemma21_i(catalog_get("euclidean").spec("dilation"), SampleGrid::tensor(8)).entry("yano").max_abs == 0.0);
}

TEST_CASE("second identity: curvature variation by stencil", "[lie][lemma-ii]") {
  const auto cigar = verify_lemma21_ii(catalog_get("cigar").default_spec(), SampleGrid::tensor(32));
  CHECK(cigar.pass);
  CHECK(cigar.entry("stencil").max_scaled < 1e-6);
  CHECK(cigar.entry("exact-jet").max_scaled < 1e-12);
  CHECK(cigar.metric("convergence order") > 3.9);
  const auto flat = verify_lemma21_ii(catalog_get("euclidean").spec("dilation"), SampleGrid::tensor(4));
  CHECK(flat.entry("stencil").max_abs == 0.0);
  CHECK(flat.metric("rounding dominated") == 1.0);
  const auto sphere = verify_lemma21_ii(catalog_get("round_sphere").default_spec(), SampleGrid::tensor(8));
  CHECK(sphere.pass);
  CHECK(sphere.entry("stencil").max_abs < 1e-10);
  CHECK(verify_lemma21_ii(catalog_get("almost_sphere", {{"n", 3}}).default_spec(), SampleGrid::tensor(4)).pass);
}

TEST_CASE("stencil and exact-jet curvature variation agree", "[lie][lemma-ii]") {
  const auto s = catalog_get("cigar").default_spec();
  const Point x{0.4, -1.3};
  const auto p = SolitonPoint::at(s, x);
  const auto exact = values(lie_riemann_exact(p.geo, p.v));
  const auto e1 = max_abs(lie_riemann(s.metric, s.field, x, 1e-2) - exact);
  const auto e2 = max_abs(lie_riemann(s.metric, s.field, x, 2e-2) - exact);
  CHECK(e1 < 1e-7);
  CHECK(std::log2(e2 / e1) == Approx(4.0).margin(0.05));
  CHECK(max_abs(exact - lemma21_ii_rhs(p)) < 1e-13);
}

TEST_CASE("third identity: dual candidates", "[lie][lemma-iii]") {
  for (const auto& name : {"euclidean", "round_sphere"}) {
    const auto rep = verify_lemma21_iii(catalog_get(name).default_spec(), SampleGrid::tensor(6));
    CHECK(rep.entry("paper-literal").max_abs < 1e-10);
    CHECK(rep.entry("contraction-derived").max_abs < 1e-10);
  }
  const auto cigar = verify_lemma21_iii(catalog_get("cigar").default_spec(), SampleGrid::tensor(16));
  CHECK(cigar.pass);
  CHECK(cigar.entry("contraction-derived").max_scaled < 1e-6);
  CHECK(cigar.entry("paper-literal").informational);
  CHECK(cigar.entry("paper-literal").max_abs > 0.1);
}

TEST_CASE("fourth identity: dual candidates and the literal gap", "[lie][lemma-iv]") {
  const auto s = catalog_get("cigar").default_spec();
  const auto origin = lemma21_iv_terms(SolitonPoint::at(s, Point{0.0, 0.0}));
  CHECK(origin.literal - origin.lhs == Approx(32.0).epsilon(1e-12));
  CHECK(origin.expected_gap == Approx(32.0).epsilon(1e-14));
  // Closed forms: V(R) = -32 r^2/(1+r^2)^2, Delta R = 16 (r^2 - 1)/(1+r^2)^2.
  oracle::Uniform u(5);
  for (int k = 0; k < 50; ++k) {
    const Point x{u(-10, 10), u(-10, 10)};
    const double r2 = x[0] * x[0] + x[1] * x[1];
    const auto t = lemma21_iv_terms(SolitonPoint::at(s, x));
    CHECK(t.lhs == Approx(-32 * r2 / ((1 + r2) * (1 + r2))).margin(1e-12));
    CHECK(t.literal == Approx(-2 * 16 * (r2 - 1) / ((1 + r2) * (1 + r2))).margin(1e-12));
    CHECK(t.literal - t.lhs == Approx(32 / ((1 + r2) * (1 + r2))).margin(1e-12));
  }
  const auto rep = verify_lemma21_iv(s, SampleGrid::tensor(32));
  CHECK(rep.pass);
  CHECK(rep.entry("contraction-derived").max_scaled < 1e-7);
  CHECK(rep.entry("literal gap = 2R(R-c)").max_scaled < 1e-7);
  for (const auto& name : {"euclidean", "round_sphere"}) {
    const auto r = verify_lemma21_iv(catalog_get(name).default_spec(), SampleGrid::tensor(6));
    CHECK(r.entry("paper-literal").max_abs < 1e-10);
    CHECK(r.entry("contraction-derived").max_abs < 1e-10);
  }
}

TEST_CASE("almost soliton passes every identity with grad(R - c)", "[lie][almost]") {
  for (const auto& ref : {"almost_sphere", "almost_sphere:n=3,rho=1.5"}) {
    const auto s = catalog_get_ref(ref).default_spec();
    INFO(ref);
    CHECK(s.kind() == SolitonSpec::Kind::Almost);
    CHECK(verify_soliton(s, SampleGrid::random(500)).pass);
    CHECK(verify_lemma21_i(s, SampleGrid::tensor(5)).pass);
    CHECK(verify_lemma21_ii(s, SampleGrid::tensor(4)).pass);
    CHECK(verify_lemma21_iii(s, SampleGrid::tensor(4)).pass);
    CHECK(verify_lemma21_iv(s, SampleGrid::tensor(5)).pass);
    CHECK(verify_geodesic_identity(s, SampleGrid::tensor(5)).pass);
  }
}

TEST_CASE("commutator examples", "[lie][commutator]") {
  const Point x{0.4, -0.9};
  const auto dx = VectorField::parse({"1", "0"}, 2), dy = VectorField::parse({"0", "1"}, 2);
  for (double c : commutator(dx, dy, x)) CHECK(c == 0.0);
  const auto dil = VectorField::parse({"x1", "x2"}, 2), rot = VectorField::parse({"-x2", "x1"}, 2);
  for (double c : commutator(dil, rot, x)) CHECK(c == 0.0);
  // Linear fields: [M1 x, M2 x] = [M2, M1] x.
  oracle::Uniform u(13);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 3;
    Matrix m1(n, std::vector<double>(n)), m2(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        m1[i][j] = u(-1, 1);
        m2[i][j] = u(-1, 1);
      }
    Point p(n);
    for (auto& v : p) v = u(-1, 1);
    const auto got = commutator(linear_field(m1), linear_field(m2), p);
    for (int i = 0; i < n; ++i) {
      double want = 0.0;
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) want += (m2[i][k] * m1[k][j] - m1[i][k] * m2[k][j]) * p[j];
      CHECK(got[i] == Approx(want).margin(1e-13));
    }
  }
}

TEST_CASE("commutator of two solitons is Killing", "[lie][commutator]") {
  const auto e = catalog_get("euclidean", {{"n", 3}});
  oracle::Uniform u(99);
  for (int trial = 0; trial < 10; ++trial) {
    const double a = u(-2, 2), b = u(-2, 2);
    const auto s1 = euclidean_spec(e, random_soliton_matrix(u, 3, a), a);
    const auto s2 = euclidean_spec(e, random_soliton_matrix(u, 3, b), b);
    const auto rep = verify_commutator_killing(s1, s2, SampleGrid::random(50));
    CHECK(rep.pass);
    CHECK(rep.entry("L_[V1,V2] g").max_abs < 1e-10);
    CHECK(rep.entry("L_(V1-V2) g - 2(c2-c1) g").max_abs < 1e-10);
  }
  const auto& s = e.spec("dilation+rotA");
  const auto same = verify_commutator_killing(s, s, SampleGrid::random(20));
  CHECK(same.metric("max |[V1,V2]|") == 0.0);
  CHECK_THROWS_AS(verify_commutator_killing(s, catalog_get("cigar").default_spec(), SampleGrid::random(5)),
                  std::invalid_argument);
  // Also for the almost soliton paired with itself plus a Killing rotation.
  const auto as = catalog_get("almost_sphere");
  auto rotated = as.default_spec();
  rotated.field = VectorField::parse({"-sin(x1)", "1"}, 2);
  CHECK(verify_commutator_killing(as.default_spec(), rotated, SampleGrid::random(50), 1e-9).pass);
}

TEST_CASE("box operator and the geodesic identity", "[lie][box]") {
  const auto e = catalog_get("euclidean");
  const Point x{0.2, 0.3};
  for (double v : box_operator(e.metric, VectorField::zero(2), x)) CHECK(v == 0.0);
  for (double v : box_operator(e.metric, VectorField::parse({"x1", "0"}, 2), x)) CHECK(v == 0.0);
  const auto c = catalog_get("cigar").default_spec();
  const auto rep = verify_geodesic_identity(c, SampleGrid::tensor(32));
  CHECK(rep.pass);
  CHECK(rep.metric("max |box V|") < 1e-7);
  CHECK(rep.metric("max |grad R|") > 0.5);
  for (const auto& m : catalog_soliton_entries())
    for (const auto& s : m.specs) CHECK(verify_geodesic_identity(s, SampleGrid::tensor(8)).pass);
  // n = 3 sphere: Killing field, constant R, both sides vanish.
  const auto s3 = verify_geodesic_identity(catalog_get("round_sphere", {{"n", 3}}).default_spec(), SampleGrid::tensor(5));
  CHECK(s3.metric("max |box V|") < 1e-10);
}

TEST_CASE("lie_metric agrees with the flow of the field", "[lie][oracle]") {
  struct Case {
    CatalogEntry m;
    VectorField v;
  };
  std::vector<Case> cases{
      {catalog_get("round_sphere"), catalog_get("round_sphere").default_spec().field},
      {catalog_get("almost_sphere"), catalog_get("almost_sphere").default_spec().field},
      {catalog_get("cigar"), catalog_get("cigar").default_spec().field},
      {catalog_get("perturbed_torus"), VectorField::parse({"sin(x2)", "0.5*cos(x1)"}, 2)},
      {catalog_get("round_sphere", {{"n", 3}}), VectorField::parse({"0", "0", "1"}, 3)},
  };
  for (const auto& c : cases) {
    INFO(c.m.name);
    for (const auto& x : SampleGrid::random(10, 4).points(c.m.chart)) {
      const auto lg = lie_metric(c.m.metric, c.v, x);
      const auto fd = flow_lie_metric(c.m.metric, c.v, x);
      const double scale = std::max(1.0, max_abs(lg));
      for (std::size_t k = 0; k < fd.size(); ++k) CHECK(std::abs(lg.flat(k) - fd[k]) / scale < 1e-5);
      // Killing in one sense iff Killing in the other.
      double fd_norm = 0.0;
      for (double v : fd) fd_norm = std::max(fd_norm, std::abs(v));
      CHECK((max_abs(lg) < 1e-6) == (fd_norm < 1e-6));
    }
  }
}

TEST_CASE("directional derivative of R matches its transport along the flow", "[lie][oracle]") {
  for (const auto& ref : {"cigar", "almost_sphere", "almost_sphere:n=3"}) {
    const auto s = catalog_get_ref(ref).default_spec();
    INFO(ref);
    for (const auto& x : SampleGrid::random(10, 8).points(s.chart)) {
      const double eps = 1e-4;
      const double fd = (scalar_curvature(s.metric, flow_map(s.field, x, eps)) -
                         scalar_curvature(s.metric, flow_map(s.field, x, -eps))) /
                        (2 * eps);
      const double lhs = lemma21_iv_terms(SolitonPoint::at(s, x)).lhs;
      CHECK(std::abs(fd - lhs) < 1e-5 * std::max(1.0, std::abs(lhs)));
    }
  }
  // A nonconstant R needs a field that moves it; the perturbed torus with a random field.
  const auto pt = catalog_get("perturbed_torus");
  SolitonSpec s;
  s.chart = pt.chart;
  s.metric = pt.metric;
  s.field = VectorField::parse({"cos(x2)", "sin(x1) + 0.2"}, 2);
  for (const auto& x : SampleGrid::random(10, 8).points(s.chart)) {
    const double eps = 1e-4;
    const double fd = (scalar_curvature(s.metric, flow_map(s.field, x, eps)) -
                       scalar_curvature(s.metric, flow_map(s.field, x, -eps))) /
                      (2 * eps);
    CHECK(std::abs(fd - lemma21_iv_terms(SolitonPoint::at(s, x)).lhs) < 1e-5);
  }
}

TEST_CASE("verifier reports do not depend on the thread count", "[lie][determinism]") {
  const auto s = catalog_get("cigar").default_spec();
  VerifyOptions one, many;
  one.threads = 1;
  many.threads = 4;
  const auto a = verify_lemma21_ii(s, SampleGrid::random(97, 3), one);
  const auto b = verify_lemma21_ii(s, SampleGrid::random(97, 3), many);
  REQUIRE(a.entries.size() == b.entries.size());
  for (std::size_t k = 0; k < a.entries.size(); ++k) {
    CHECK(a.entries[k].max_abs == b.entries[k].max_abs);
    CHECK(a.entries[k].mean_abs == b.entries[k].mean_abs);
  }
  for (std::size_t k = 0; k < a.metrics.size(); ++k)
    CHECK((a.metrics[k].second == b.metrics[k].second ||
           (std::isnan(a.metrics[k].second) && std::isnan(b.metrics[k].second))));
}

TEST_CASE("halving the grid spacing leaves rounding-level residuals rounding-level", "[lie][property]") {
  for (const auto& e : catalog_soliton_entries()) {
    const auto& s = e.default_spec();
    INFO(e.name);
    using Fn = IdentityResidualReport (*)(const SolitonSpec&, const SampleGrid&, const VerifyOptions&);
    for (Fn f : {Fn(&verify_lemma21_i), Fn(&verify_lemma21_iv), Fn(&verify_geodesic_identity)}) {
      const auto coarse = f(s, SampleGrid::tensor(8), {});
      const auto fine = f(s, SampleGrid::tensor(16), {});
      for (std::size_t k = 0; k < coarse.entries.size(); ++k) {
        if (coarse.entries[k].informational) continue;
        const double a = coarse.entries[k].max_abs, b = fine.entries[k].max_abs;
        const double floor = 1e-13;
        CHECK(std::max(a, b) <= 10 * std::min(a, b) + floor);
      }
    }
  }
}

TEST_CASE("evaluation failures are reported per point", "[lie][errors]") {
  SolitonSpec s;
  s.name = "singular";
  s.chart = Chart::make({Interval{-1, 1}, Interval{-1, 1}});
  s.metric = MetricField::diagonal({"x1", "1"});
  s.field = VectorField::parse({"x1", "0"}, 2);
  s.c = 0.0;
  const auto rep = verify_soliton(s, SampleGrid::tensor(5));
  CHECK(rep.failed_points > 0);
  CHECK_FALSE(rep.pass);
  CHECK(rep.failed_points < rep.points);
  CHECK_FALSE(rep.failures.empty());
}
