#pragma once

#include <cmath>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "yamabe/exprlang/jet.hpp"

namespace yamabe {

enum class Variance { Up, Down };

/// Dense component array of a tensor at one point, in a chart of dimension
/// `dim`. Slot i is contravariant or covariant according to variance(i).
/// T is double for values and Jet for components carrying derivatives.
template <class T>
class Tensor {
public:
  Tensor() = default;
  Tensor(int dim, std::vector<Variance> slots, T fill = T{})
      : dim_(dim), slots_(std::move(slots)), data_(flat_size(dim, slots_.size()), fill) {}

  int dim() const { return dim_; }
  int rank() const { return static_cast<int>(slots_.size()); }
  Variance variance(int slot) const { return slots_[slot]; }
  const std::vector<Variance>& slots() const { return slots_; }
  std::size_t size() const { return data_.size(); }

  template <class... I>
  T& operator()(I... idx) {
    return data_[offset({static_cast<int>(idx)...})];
  }
  template <class... I>
  const T& operator()(I... idx) const {
    return data_[offset({static_cast<int>(idx)...})];
  }

  T& at(std::span<const int> idx) { return data_[offset(idx)]; }
  const T& at(std::span<const int> idx) const { return data_[offset(idx)]; }

  T& flat(std::size_t i) { return data_[i]; }
  const T& flat(std::size_t i) const { return data_[i]; }
  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  /// Multi-index of flat position i (slot 0 most significant).
  std::vector<int> unflatten(std::size_t i) const {
    std::vector<int> idx(slots_.size());
    for (int s = rank() - 1; s >= 0; --s) {
      idx[s] = static_cast<int>(i % dim_);
      i /= dim_;
    }
    return idx;
  }

private:
  static std::size_t flat_size(int dim, std::size_t rank) {
    std::size_t n = 1;
    for (std::size_t i = 0; i < rank; ++i) n *= dim;
    return n;
  }

  std::size_t offset(std::initializer_list<int> idx) const {
    return offset(std::span<const int>(idx.begin(), idx.size()));
  }
  std::size_t offset(std::span<const int> idx) const {
    std::size_t o = 0;
    for (int v : idx) o = o * dim_ + v;
    return o;
  }

  int dim_ = 0;
  std::vector<Variance> slots_;
  std::vector<T> data_;
};

inline std::vector<Variance> slots(std::initializer_list<Variance> v) { return v; }

inline Tensor<double> values(const Tensor<Jet>& t) {
  Tensor<double> out(t.dim(), t.slots(), 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) out.flat(i) = t.flat(i).value();
  return out;
}

inline int min_order(const Tensor<Jet>& t) {
  int o = kMaxJetOrder;
  for (const auto& j : t.data()) o = std::min(o, j.order());
  return o;
}

inline double max_abs(const Tensor<double>& t) {
  double m = 0.0;
  for (double v : t.data()) m = std::max(m, std::abs(v));
  return m;
}

inline Tensor<double> operator-(const Tensor<double>& a, const Tensor<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("tensor shape mismatch");
  Tensor<double> out = a;
  for (std::size_t i = 0; i < a.size(); ++i) out.flat(i) -= b.flat(i);
  return out;
}

inline Tensor<double> operator+(const Tensor<double>& a, const Tensor<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("tensor shape mismatch");
  Tensor<double> out = a;
  for (std::size_t i = 0; i < a.size(); ++i) out.flat(i) += b.flat(i);
  return out;
}

inline Tensor<double> operator*(double s, Tensor<double> a) {
  for (auto& v : a.data()) v *= s;
  return a;
}

}  // namespace yamabe
