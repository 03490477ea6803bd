#pragma once

#include <memory>
#include <span>
#include <string>
#include <variant>

#include "yamabe/geometry/chart.hpp"
#include "yamabe/geometry/fields.hpp"

namespace yamabe {

/// (g, V, c) with constant c (Yamabe soliton) or c a function (almost
/// Yamabe soliton): L_V g = 2 (R - c) g.
struct SolitonSpec {
  enum class Kind { Soliton, Almost };

  std::string name;
  Chart chart;
  MetricField metric;
  VectorField field;
  std::variant<double, ScalarField> c = 0.0;
  bool claimed_valid = true;
  std::string provenance;

  Kind kind() const { return std::holds_alternative<double>(c) ? Kind::Soliton : Kind::Almost; }

  Jet c_jet(std::span<const double> x, int order) const {
    if (const double* v = std::get_if<double>(&c)) return Jet::constant(static_cast<int>(x.size()), order, *v);
    return std::get<ScalarField>(c).jet(x, order);
  }

  double c_at(std::span<const double> x) const { return c_jet(x, 0).value(); }

  /// Text form of c: a number or an expression.
  std::string c_string() const {
    if (const double* v = std::get_if<double>(&c)) return Expr::number(*v).str();
    return std::get<ScalarField>(c).expr().str();
  }
};

inline bool same_metric(const MetricField& a, const MetricField& b) {
  if (a.dim() != b.dim()) return false;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = i; j < a.dim(); ++j)
      if (!(a.component(i, j) == b.component(i, j))) return false;
  return true;
}

}  // namespace yamabe
