#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

#include "yamabe/flow/flow.hpp"
#include "yamabe/geometry/calculus.hpp"

using namespace yamabe;
using Catch::Approx;
using std::numbers::pi;

namespace {

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Closed form for u = a sin(x) sin(2y): Delta_0 u = -5u.
double exact_curvature(double a, double x, double y) {
  const double u = a * std::sin(x) * std::sin(2 * y);
  return -2.0 * std::exp(-2.0 * u) * (-5.0 * u);
}

double curvature_error(int n, double a) {
  const auto s = ConformalState::from_expression(std::to_string(a) + "*sin(x1)*sin(2*x2)", n);
  const auto r = scalar_curvature_conformal(s);
  double e = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      e = std::max(e, std::abs(r[i * n + j] - exact_curvature(a, i * s.spacing(), j * s.spacing())));
  return e;
}

}  // namespace

TEST_CASE("scalar_curvature_conformal examples", "[flow]") {
  auto c = ConformalState::zero(16);
  for (auto& v : c.u) v = 0.37;
  for (double r : scalar_curvature_conformal(c)) CHECK(r == 0.0);

  const double eps = 0.01;
  const auto s = ConformalState::from_expression("0.01*sin(x1)", 64);
  const auto fine = ConformalState::from_expression("0.01*sin(x1)", 128);
  const auto r = scalar_curvature_conformal(s), rf = scalar_curvature_conformal(fine);
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; j += 7) {
      CHECK(std::abs(r[i * 64 + j] - rf[(2 * i) * 128 + 2 * j]) < 1e-7);
      const double x = i * s.spacing();
      CHECK(r[i * 64 + j] == Approx(2 * eps * std::sin(x) * std::exp(-2 * eps * std::sin(x))).margin(1e-7));
    }
}

TEST_CASE("grid curvature agrees with the geometry module", "[flow][cross-module]") {
  const int n = 128;
  const std::string u = "0.1*sin(x1)*sin(x2) + 0.05*cos(2*x1)";
  const auto s = ConformalState::from_expression(u, n);
  const auto r = scalar_curvature_conformal(s);
  const auto m = MetricField::diagonal({"exp(2*(" + u + "))", "exp(2*(" + u + "))"});
  for (int k = 0; k < 100; ++k) {
    const int i = (k * 37) % n, j = (k * 11 + 3) % n;
    const Point x{i * s.spacing(), j * s.spacing()};
    CHECK(std::abs(r[i * n + j] - scalar_curvature(m, x)) < 1e-6);
  }
}

TEST_CASE("spatial discretisation is fourth order", "[flow][property]") {
  const double e16 = curvature_error(16, 0.3), e32 = curvature_error(32, 0.3), e64 = curvature_error(64, 0.3);
  CHECK(std::log2(e16 / e32) > 3.9);
  CHECK(std::log2(e32 / e64) > 3.9);
}

TEST_CASE("flow_step examples", "[flow]") {
  const auto z = ConformalState::zero(16);
  const auto z1 = flow_step(z, 1e-3);
  CHECK(z1.u == z.u);
  CHECK(z1.t == 1e-3);

  auto s = ConformalState::from_expression("0.1*sin(x1)", 64);
  double prev = max_abs(scalar_curvature_conformal(s));
  for (int k = 0; k < 100; ++k) {
    s = flow_step(s, 1e-4);
    const double now = max_abs(scalar_curvature_conformal(s));
    CHECK(now < prev);
    prev = now;
  }

  CHECK_THROWS_AS(flow_step(s, 1.0), FlowError);
  CHECK(cfl_limit(z) == Approx(0.2 * std::pow(2 * pi / 16, 2)));
  CHECK_THROWS_AS(flow_step(s, -1e-4), std::invalid_argument);
}

TEST_CASE("area is conserved by the normalised flow", "[flow]") {
  const auto s = ConformalState::from_expression("0.1*sin(x1)*sin(x2)", 64);
  const auto tr = run_flow(s, 1e-4, 1000);
  CHECK(tr.steps_taken == 1000);
  CHECK(tr.relative_area_drift() < 1e-6);
  CHECK(tr.samples.size() == 1001);
}

TEST_CASE("run_flow examples", "[flow]") {
  const auto z = run_flow(ConformalState::zero(8), 1e-3, 100);
  CHECK(z.converged);
  CHECK(z.steps_taken == 0);
  CHECK(z.samples.size() == 1);

  FlowOptions opt;
  opt.divergence_limit = 0.05;
  CHECK_THROWS_AS(run_flow(ConformalState::from_expression("0.1*sin(x1)", 16), 1e-3, 10, opt), FlowError);

  // Larger steps than the acceptance run; the limit is the same flat metric.
  const auto tr = run_flow(ConformalState::from_expression("0.1*sin(x1)*sin(x2)", 32), 5e-3, 4000);
  CHECK(tr.converged);
  CHECK(tr.max_abs_curvature() < 1e-8);
  CHECK(tr.relative_area_drift() < 1e-6);
  // The linearised mode sin x sin y decays like exp(-2t).
  const auto& a = tr.samples[200];
  const auto& b = tr.samples[400];
  CHECK(std::log(a.max_r / b.max_r) / (b.t - a.t) == Approx(2.0).epsilon(0.02));
  // |r| decays to the rounding floor.
  for (std::size_t k = 10; k < tr.samples.size(); ++k) CHECK(std::abs(tr.samples[k].r) <= 10 * tr.samples[k].r_floor + 1e-15);

  ConformalState bad = ConformalState::zero(8);
  bad.n = 7;
  CHECK_THROWS_AS(run_flow(bad, 1e-3, 1), std::invalid_argument);
  bad = ConformalState::zero(8);
  bad.u[3] = std::nan("");
  CHECK_THROWS_AS(run_flow(bad, 1e-3, 1), std::invalid_argument);
}

TEST_CASE("grid refinement: N = 64 and N = 128 agree at shared nodes", "[flow][property]") {
  const std::string u0 = "0.1*sin(x1)*sin(x2)";
  const double dt = 2.5e-4;
  const auto a = run_flow(ConformalState::from_expression(u0, 64), dt, 2000).final_state;
  const auto b = run_flow(ConformalState::from_expression(u0, 128), dt, 2000).final_state;
  double e = 0.0;
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j) e = std::max(e, std::abs(a.at(i, j) - b.at(2 * i, 2 * j)));
  CHECK(e < 1e-5);
}

TEST_CASE("threads do not change the trajectory", "[flow][determinism]") {
  const auto s = ConformalState::from_expression("0.2*cos(x1)*sin(2*x2)", 32);
  FlowOptions one, four;
  four.threads = 4;
  const auto a = run_flow(s, 1e-3, 50, one), b = run_flow(s, 1e-3, 50, four);
  CHECK(a.final_state.u == b.final_state.u);
  std::ostringstream ca, cb;
  write_trajectory_csv(ca, a);
  write_trajectory_csv(cb, b);
  CHECK(ca.str() == cb.str());
}

TEST_CASE("trajectory CSV and u-grid dumps", "[flow][io]") {
  const auto tr = run_flow(ConformalState::from_expression("0.1*sin(x1)", 8), 1e-2, 3);
  std::ostringstream csv;
  write_trajectory_csv(csv, tr);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,r,minR,maxR,area");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 4);
  }
  CHECK(rows == 4);

  std::ostringstream dump;
  write_u_grid(dump, tr.final_state);
  std::istringstream grid(dump.str());
  std::getline(grid, line);
  CHECK(line.rfind("# N=8 t=", 0) == 0);
  // Full precision: values round-trip exactly.
  for (int i = 0; i < 8; ++i) {
    std::getline(grid, line);
    std::istringstream row(line);
    for (int j = 0; j < 8; ++j) {
      double v;
      row >> v;
      CHECK(v == tr.final_state.at(i, j));
    }
  }
  CHECK(format_double(0.1) == "0.10000000000000001");
}
