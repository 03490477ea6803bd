#pragma once

// Normalized Yamabe flow in the conformal class of the flat 2-torus:
// g = e^{2u} g0, R = -2 e^{-2u} Lap0 u, u_t = -(R - r)/2.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "yamabe/exprlang/expr.hpp"
#include "yamabe/util/parallel.hpp"
#include "yamabe/util/sum.hpp"

namespace yamabe {

/// u on an N x N periodic grid over [0, 2 pi)^2, u(i, j) at (i h, j h).
struct ConformalState {
  int n = 0;
  double t = 0.0;
  std::vector<double> u;  // row-major, index i * n + j

  double spacing() const { return 2 * std::numbers::pi / n; }
  double& at(int i, int j) { return u[static_cast<std::size_t>(i) * n + j]; }
  double at(int i, int j) const { return u[static_cast<std::size_t>(i) * n + j]; }

  void validate() const {
    if (n < 8 || n % 2 != 0) throw std::invalid_argument("flow grid size N must be even and at least 8");
    if (u.size() != static_cast<std::size_t>(n) * n) throw std::invalid_argument("flow grid has the wrong size");
    for (double v : u)
      if (!std::isfinite(v)) throw std::invalid_argument("flow grid contains a non-finite value");
  }

  static ConformalState zero(int n) {
    ConformalState s;
    s.n = n;
    s.u.assign(static_cast<std::size_t>(n) * n, 0.0);
    s.validate();
    return s;
  }

  /// Samples an expression in x1, x2 at the grid nodes.
  static ConformalState from_expression(const std::string& src, int n) {
    ConformalState s = zero(n);
    const Expr e = parse(src, 2);
    const double h = s.spacing();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double x[2] = {i * h, j * h};
        s.at(i, j) = eval(e, x);
      }
    s.validate();
    return s;
  }
};

class FlowError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace flow_detail {

inline int wrap(int i, int n) { return ((i % n) + n) % n; }

/// Fourth-order periodic Laplacian.
inline void laplacian(const std::vector<double>& u, int n, double h, std::vector<double>& out, unsigned threads) {
  out.resize(u.size());
  const double s = 1.0 / (12.0 * h * h);
  util::parallel_for(
      static_cast<std::size_t>(n),
      [&](std::size_t ii) {
        const int i = static_cast<int>(ii);
        const int im2 = wrap(i - 2, n), im1 = wrap(i - 1, n), ip1 = wrap(i + 1, n), ip2 = wrap(i + 2, n);
        for (int j = 0; j < n; ++j) {
          const int jm2 = wrap(j - 2, n), jm1 = wrap(j - 1, n), jp1 = wrap(j + 1, n), jp2 = wrap(j + 2, n);
          auto v = [&](int a, int b) { return u[static_cast<std::size_t>(a) * n + b]; };
          const double c = v(i, j);
          // Written in differences so that constants cancel exactly.
          const double dxx = 16 * ((v(im1, j) - c) + (v(ip1, j) - c)) - ((v(im2, j) - c) + (v(ip2, j) - c));
          const double dyy = 16 * ((v(i, jm1) - c) + (v(i, jp1) - c)) - ((v(i, jm2) - c) + (v(i, jp2) - c));
          out[ii * n + j] = (dxx + dyy) * s;
        }
      },
      threads);
}

}  // namespace flow_detail

inline std::vector<double> scalar_curvature_conformal(const std::vector<double>& u, int n, unsigned threads = 1) {
  std::vector<double> lap;
  flow_detail::laplacian(u, n, 2 * std::numbers::pi / n, lap, threads);
  for (std::size_t k = 0; k < u.size(); ++k) lap[k] = -2.0 * std::exp(-2.0 * u[k]) * lap[k];
  return lap;
}

inline std::vector<double> scalar_curvature_conformal(const ConformalState& s, unsigned threads = 1) {
  return scalar_curvature_conformal(s.u, s.n, threads);
}

/// Area sum(e^{2u} h^2).
inline double conformal_area(const std::vector<double>& u, int n) {
  const double h = 2 * std::numbers::pi / n;
  util::CompensatedSum a;
  for (double v : u) a += std::exp(2.0 * v);
  return a.value() * h * h;
}

struct CurvatureSummary {
  double r = 0.0;  // area-weighted mean of R
  double min_r = 0.0;
  double max_r = 0.0;
  double area = 0.0;
  double r_floor = 0.0;  // rounding floor of r: N^2 eps mean |R|
};

inline CurvatureSummary summarize(const std::vector<double>& u, const std::vector<double>& curv, int n) {
  const double h = 2 * std::numbers::pi / n;
  util::CompensatedSum num, abs_num, area;
  CurvatureSummary s;
  s.min_r = std::numeric_limits<double>::infinity();
  s.max_r = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double w = std::exp(2.0 * u[k]);
    num += curv[k] * w;
    abs_num += std::abs(curv[k]) * w;
    area += w;
    s.min_r = std::min(s.min_r, curv[k]);
    s.max_r = std::max(s.max_r, curv[k]);
  }
  s.r = num.value() / area.value();
  s.r_floor = static_cast<double>(u.size()) * std::numeric_limits<double>::epsilon() * abs_num.value() / area.value();
  s.area = area.value() * h * h;
  return s;
}

/// Largest step the explicit scheme accepts: 0.2 h^2 min e^{2u}.
inline double cfl_limit(const ConformalState& s) {
  const double h = s.spacing();
  const double umin = *std::min_element(s.u.begin(), s.u.end());
  return 0.2 * h * h * std::exp(2.0 * umin);
}

/// One RK4 step of u_t = -(R - r)/2, r recomputed at every stage.
inline ConformalState flow_step(const ConformalState& s, double dt, unsigned threads = 1) {
  s.validate();
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  const double limit = cfl_limit(s);
  if (dt > limit)
    throw FlowError("time step " + std::to_string(dt) + " exceeds the stability bound 0.2 h^2 min e^{2u} = " +
                    std::to_string(limit));
  const std::size_t m = s.u.size();
  auto rhs = [&](const std::vector<double>& u, std::vector<double>& k) {
    const auto curv = scalar_curvature_conformal(u, s.n, threads);
    const double r = summarize(u, curv, s.n).r;
    k.resize(m);
    for (std::size_t i = 0; i < m; ++i) k[i] = -0.5 * (curv[i] - r);
  };
  std::vector<double> k1, k2, k3, k4, tmp(m);
  rhs(s.u, k1);
  for (std::size_t i = 0; i < m; ++i) tmp[i] = s.u[i] + 0.5 * dt * k1[i];
  rhs(tmp, k2);
  for (std::size_t i = 0; i < m; ++i) tmp[i] = s.u[i] + 0.5 * dt * k2[i];
  rhs(tmp, k3);
  for (std::size_t i = 0; i < m; ++i) tmp[i] = s.u[i] + dt * k3[i];
  rhs(tmp, k4);
  ConformalState out = s;
  for (std::size_t i = 0; i < m; ++i) out.u[i] = s.u[i] + dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  out.t = s.t + dt;
  return out;
}

struct FlowSample {
  long step = 0;
  double t = 0.0;
  double r = 0.0;
  double min_r = 0.0;
  double max_r = 0.0;
  double area = 0.0;
  double r_floor = 0.0;
};

struct FlowOptions {
  double stop_tolerance = 1e-8;    // stop once max |R| falls below this
  double divergence_limit = 50.0;  // abort once max |u| exceeds this
  unsigned threads = 1;
};

struct FlowTrajectory {
  std::vector<FlowSample> samples;  // one per step, starting with step 0
  ConformalState final_state;
  long steps_taken = 0;
  bool converged = false;  // stopped early on the curvature tolerance

  double max_abs_curvature() const {
    const auto& s = samples.back();
    return std::max(std::abs(s.min_r), std::abs(s.max_r));
  }

  double relative_area_drift() const {
    double d = 0.0;
    for (const auto& s : samples) d = std::max(d, std::abs(s.area - samples.front().area) / samples.front().area);
    return d;
  }
};

inline FlowSample sample_of(const ConformalState& s, long step, unsigned threads) {
  const auto curv = scalar_curvature_conformal(s, threads);
  const auto sum = summarize(s.u, curv, s.n);
  return {step, s.t, sum.r, sum.min_r, sum.max_r, sum.area, sum.r_floor};
}

/// Runs up to `steps` steps; stops early when max |R| < stop_tolerance and
/// throws FlowError when max |u| exceeds the divergence limit.
inline FlowTrajectory run_flow(const ConformalState& initial, double dt, long steps, const FlowOptions& opt = {}) {
  initial.validate();
  if (steps < 0) throw std::invalid_argument("step count must be nonnegative");
  FlowTrajectory tr;
  ConformalState s = initial;
  tr.samples.push_back(sample_of(s, 0, opt.threads));
  auto converged = [&](const FlowSample& f) {
    return std::max(std::abs(f.min_r), std::abs(f.max_r)) < opt.stop_tolerance;
  };
  for (long k = 1; k <= steps && !converged(tr.samples.back()); ++k) {
    s = flow_step(s, dt, opt.threads);
    double umax = 0.0;
    for (double v : s.u) umax = std::max(umax, std::abs(v));
    if (!(umax <= opt.divergence_limit))
      throw FlowError("flow diverged at step " + std::to_string(k) + " (t = " + std::to_string(s.t) +
                      "): max |u| = " + std::to_string(umax));
    tr.samples.push_back(sample_of(s, k, opt.threads));
    tr.steps_taken = k;
  }
  tr.converged = converged(tr.samples.back());
  tr.final_state = std::move(s);
  return tr;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// CSV with header t,r,minR,maxR,area.
inline void write_trajectory_csv(std::ostream& os, const FlowTrajectory& tr) {
  os << "t,r,minR,maxR,area\n";
  for (const auto& s : tr.samples)
    os << format_double(s.t) << ',' << format_double(s.r) << ',' << format_double(s.min_r) << ','
       << format_double(s.max_r) << ',' << format_double(s.area) << '\n';
}

/// One comment line "# N=<n> t=<t>", then N rows of N space-separated values.
inline void write_u_grid(std::ostream& os, const ConformalState& s) {
  os << "# N=" << s.n << " t=" << format_double(s.t) << '\n';
  for (int i = 0; i < s.n; ++i) {
    for (int j = 0; j < s.n; ++j) os << (j ? " " : "") << format_double(s.at(i, j));
    os << '\n';
  }
}

}  // namespace yamabe
