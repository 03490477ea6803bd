#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "yamabe/exprlang/expr.hpp"
#include "yamabe/geometry/tensor.hpp"

namespace yamabe {

class ScalarField {
public:
  ScalarField() = default;
  explicit ScalarField(Expr e) : expr_(std::move(e)) {}
  static ScalarField parse(std::string_view src, int dim) { return ScalarField(yamabe::parse(src, dim)); }
  static ScalarField constant(double v) { return ScalarField(Expr::number(v)); }

  const Expr& expr() const { return expr_; }
  Jet jet(std::span<const double> x, int order) const { return eval_jet(expr_, x, order); }
  double operator()(std::span<const double> x) const { return eval(expr_, x); }

private:
  Expr expr_;
};

class VectorField {
public:
  VectorField() = default;
  explicit VectorField(std::vector<Expr> comps) : comps_(std::move(comps)) {}

  static VectorField parse(const std::vector<std::string>& src, int dim) {
    if (static_cast<int>(src.size()) != dim)
      throw std::invalid_argument("vector field needs " + std::to_string(dim) + " components");
    std::vector<Expr> c;
    for (const auto& s : src) c.push_back(yamabe::parse(s, dim));
    return VectorField(std::move(c));
  }
  static VectorField zero(int dim) { return VectorField(std::vector<Expr>(dim, Expr::number(0.0))); }

  int dim() const { return static_cast<int>(comps_.size()); }
  const Expr& component(int i) const { return comps_[i]; }
  const std::vector<Expr>& components() const { return comps_; }

  Tensor<Jet> jets(std::span<const double> x, int order) const {
    Tensor<Jet> v(dim(), {Variance::Up});
    for (int i = 0; i < dim(); ++i) v(i) = eval_jet(comps_[i], x, order);
    return v;
  }

  std::vector<double> operator()(std::span<const double> x) const {
    std::vector<double> v(dim());
    for (int i = 0; i < dim(); ++i) v[i] = eval(comps_[i], x);
    return v;
  }

  std::vector<std::string> strings() const {
    std::vector<std::string> s;
    for (const auto& e : comps_) s.push_back(e.str());
    return s;
  }

private:
  std::vector<Expr> comps_;
};

/// Symmetric (0,2) metric; only i <= j components are stored.
class MetricField {
public:
  MetricField() = default;

  /// `rows` is the full n x n matrix of component texts; it must be
  /// symmetric as text (after parsing, g_ij and g_ji are the same tree).
  static MetricField parse(const std::vector<std::vector<std::string>>& rows) {
    const int n = static_cast<int>(rows.size());
    MetricField m;
    m.dim_ = n;
    for (int i = 0; i < n; ++i) {
      if (static_cast<int>(rows[i].size()) != n) throw std::invalid_argument("metric must be a square matrix");
      for (int j = i; j < n; ++j) m.upper_.push_back(yamabe::parse(rows[i][j], n));
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j)
        if (!(yamabe::parse(rows[i][j], n) == m.component(i, j)))
          throw std::invalid_argument("metric component (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                      ") differs from its transpose");
    return m;
  }

  static MetricField diagonal(const std::vector<std::string>& diag) {
    const int n = static_cast<int>(diag.size());
    std::vector<std::vector<std::string>> rows(n, std::vector<std::string>(n, "0"));
    for (int i = 0; i < n; ++i) rows[i][i] = diag[i];
    return parse(rows);
  }

  int dim() const { return dim_; }

  const Expr& component(int i, int j) const {
    if (i > j) std::swap(i, j);
    return upper_[i * dim_ - i * (i - 1) / 2 + (j - i)];
  }

  Tensor<Jet> jets(std::span<const double> x, int order) const {
    Tensor<Jet> g(dim_, {Variance::Down, Variance::Down});
    for (int i = 0; i < dim_; ++i)
      for (int j = i; j < dim_; ++j) {
        g(i, j) = eval_jet(component(i, j), x, order);
        if (j != i) g(j, i) = g(i, j);
      }
    return g;
  }

  std::vector<std::vector<std::string>> strings() const {
    std::vector<std::vector<std::string>> rows(dim_, std::vector<std::string>(dim_));
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) rows[i][j] = component(i, j).str();
    return rows;
  }

private:
  int dim_ = 0;
  std::vector<Expr> upper_;
};

/// Tensor field of arbitrary valence given by expression components, stored
/// flat in the Tensor index order.
class TensorField {
public:
  TensorField(int dim, std::vector<Variance> slots, std::vector<Expr> comps)
      : dim_(dim), slots_(std::move(slots)), comps_(std::move(comps)) {
    std::size_t n = 1;
    for (std::size_t i = 0; i < slots_.size(); ++i) n *= dim_;
    if (comps_.size() != n) throw std::invalid_argument("tensor field has the wrong number of components");
  }

  static TensorField from(const VectorField& v) {
    return TensorField(v.dim(), {Variance::Up}, v.components());
  }

  Tensor<Jet> jets(std::span<const double> x, int order) const {
    Tensor<Jet> t(dim_, slots_);
    for (std::size_t i = 0; i < comps_.size(); ++i) t.flat(i) = eval_jet(comps_[i], x, order);
    return t;
  }

private:
  int dim_;
  std::vector<Variance> slots_;
  std::vector<Expr> comps_;
};

}  // namespace yamabe
