#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace yamabe {

using Point = std::vector<double>;

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Coordinate domain. Margins are excluded from pointwise sampling so that
/// coordinate singularities (sphere poles) are never evaluated. Quadrature
/// margins are separate: Gauss-Legendre nodes never touch the endpoints, so
/// a chart may integrate over the full box while sampling a smaller one.
struct Chart {
  int dim = 2;
  std::vector<Interval> box;
  std::vector<bool> periodic;
  std::vector<double> margins;
  std::vector<double> quadrature_margins;

  static Chart make(std::vector<Interval> box, std::vector<bool> periodic = {},
                    std::vector<double> margins = {}) {
    Chart c;
    c.dim = static_cast<int>(box.size());
    c.box = std::move(box);
    c.periodic = periodic.empty() ? std::vector<bool>(c.dim, false) : std::move(periodic);
    c.margins = margins.empty() ? std::vector<double>(c.dim, 0.0) : std::move(margins);
    c.quadrature_margins = c.margins;
    c.validate();
    return c;
  }

  void validate() const {
    if (dim < 2) throw std::invalid_argument("chart dimension must be at least 2");
    if (static_cast<int>(box.size()) != dim || static_cast<int>(periodic.size()) != dim ||
        static_cast<int>(margins.size()) != dim || static_cast<int>(quadrature_margins.size()) != dim)
      throw std::invalid_argument("chart arrays must all have length dim");
    for (int i = 0; i < dim; ++i) {
      if (!(box[i].lo < box[i].hi))
        throw std::invalid_argument("chart axis " + std::to_string(i + 1) + " has lo >= hi");
      for (double m : {margins[i], quadrature_margins[i]}) {
        if (m < 0.0) throw std::invalid_argument("negative margin on axis " + std::to_string(i + 1));
        if (2 * m >= box[i].hi - box[i].lo)
          throw std::invalid_argument("margins leave an empty interior on axis " + std::to_string(i + 1));
      }
    }
  }

  /// Sampling interval of one axis: periodic axes ignore margins.
  Interval interior(int axis) const {
    if (periodic[axis]) return box[axis];
    return {box[axis].lo + margins[axis], box[axis].hi - margins[axis]};
  }

  bool contains(std::span<const double> x) const {
    for (int i = 0; i < dim; ++i)
      if (x[i] < box[i].lo || x[i] > box[i].hi) return false;
    return true;
  }
};

/// Evaluation points for pointwise identity checks.
struct SampleGrid {
  enum class Kind { Tensor, Random };
  Kind kind = Kind::Tensor;
  int per_axis = 16;
  int count = 1000;
  std::uint64_t seed = 12345;

  static SampleGrid tensor(int per_axis) { return {Kind::Tensor, per_axis, 0, 0}; }
  static SampleGrid random(int count, std::uint64_t seed = 12345) { return {Kind::Random, 0, count, seed}; }

  /// Cell-centred tensor grid, or uniform random points, in the chart interior.
  std::vector<Point> points(const Chart& chart) const {
    std::vector<Point> pts;
    if (kind == Kind::Tensor) {
      if (per_axis < 1) throw std::invalid_argument("grid needs at least one point per axis");
      std::size_t total = 1;
      for (int i = 0; i < chart.dim; ++i) total *= per_axis;
      pts.reserve(total);
      for (std::size_t flat = 0; flat < total; ++flat) {
        Point p(chart.dim);
        std::size_t rem = flat;
        for (int ax = chart.dim - 1; ax >= 0; --ax) {
          const auto iv = chart.interior(ax);
          const int k = static_cast<int>(rem % per_axis);
          rem /= per_axis;
          p[ax] = iv.lo + (k + 0.5) * (iv.hi - iv.lo) / per_axis;
        }
        pts.push_back(std::move(p));
      }
    } else {
      std::mt19937_64 eng(seed);
      pts.reserve(count);
      for (int n = 0; n < count; ++n) {
        Point p(chart.dim);
        for (int ax = 0; ax < chart.dim; ++ax) {
          const auto iv = chart.interior(ax);
          const double u = static_cast<double>(eng() >> 11) * 0x1.0p-53;
          p[ax] = iv.lo + u * (iv.hi - iv.lo);
        }
        pts.push_back(std::move(p));
      }
    }
    return pts;
  }

  std::string describe() const {
    if (kind == Kind::Tensor) return "tensor " + std::to_string(per_axis) + "/axis cell-centred";
    return "random " + std::to_string(count) + " points seed " + std::to_string(seed);
  }
};

}  // namespace yamabe
