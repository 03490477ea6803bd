#pragma once

#include <cmath>
#include <span>

namespace yamabe::util {

/// Neumaier compensated accumulator. Order of additions is the caller's
/// responsibility; results are bit-reproducible for a fixed order.
class CompensatedSum {
public:
  CompensatedSum& operator+=(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      carry_ += (sum_ - t) + v;
    else
      carry_ += (v - t) + sum_;
    sum_ = t;
    return *this;
  }

  double value() const { return sum_ + carry_; }

private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

inline double compensated_sum(std::span<const double> values) {
  CompensatedSum s;
  for (double v : values) s += v;
  return s.value();
}

}  // namespace yamabe::util
