#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "yamabe/util/sum.hpp"

namespace yamabe {

/// Residual statistics of one right-hand side over a grid. `max_scaled`
/// divides each point's residual max-norm by max(|LHS|, |RHS|, 1) at that
/// point; the pass decision uses it.
struct ResidualStats {
  std::string label;
  double tolerance = 0.0;
  double max_abs = 0.0;
  double mean_abs = 0.0;
  double max_scaled = 0.0;
  bool informational = false;
  bool pass = false;
};

struct IdentityResidualReport {
  std::string id;
  std::string subject;
  std::string grid;
  std::size_t points = 0;
  std::size_t failed_points = 0;
  std::vector<std::string> failures;  // first few evaluation failures
  std::vector<ResidualStats> entries;
  std::vector<std::pair<std::string, double>> metrics;
  bool pass = false;

  const ResidualStats& entry(const std::string& label) const {
    for (const auto& e : entries)
      if (e.label == label) return e;
    throw std::out_of_range("report " + id + " has no entry '" + label + "'");
  }

  double metric(const std::string& key) const {
    for (const auto& [k, v] : metrics)
      if (k == key) return v;
    throw std::out_of_range("report " + id + " has no metric '" + key + "'");
  }

  void finalize() {
    pass = failed_points == 0 && points > 0;
    for (const auto& e : entries)
      if (!e.informational && !e.pass) pass = false;
  }
};

/// Per-point residual max-norm and the magnitude used for scaling.
struct PointResidual {
  double abs = 0.0;
  double scale = 1.0;
};

/// Reduces per-point residuals in index order; NaN entries (failed points)
/// are skipped.
inline ResidualStats reduce_residuals(std::string label, const std::vector<PointResidual>& r, double tol,
                                      bool informational = false) {
  ResidualStats s;
  s.label = std::move(label);
  s.tolerance = tol;
  s.informational = informational;
  util::CompensatedSum sum;
  std::size_t used = 0;
  for (const auto& p : r) {
    if (std::isnan(p.abs)) continue;
    s.max_abs = std::max(s.max_abs, p.abs);
    s.max_scaled = std::max(s.max_scaled, p.abs / std::max(p.scale, 1.0));
    sum += p.abs;
    ++used;
  }
  s.mean_abs = used ? sum.value() / static_cast<double>(used) : 0.0;
  s.pass = used > 0 && s.max_scaled < tol;
  return s;
}

}  // namespace yamabe
