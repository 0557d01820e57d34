#pragma once

#include <cmath>
#include <limits>

namespace proxent {

/// Real value or +infinity: the codomain of entropy-type functions.
/// Plain IEEE infinity is used for the infinite state, so min/sup
/// comparisons and sums behave without special casing. Never NaN
/// except when a NaN input is propagated through.
class ExtendedReal {
 public:
  ExtendedReal() = default;
  ExtendedReal(double v) : value_(v) {}  // NOLINT: implicit on purpose

  static ExtendedReal infinity() {
    return ExtendedReal(std::numeric_limits<double>::infinity());
  }

  bool is_finite() const { return std::isfinite(value_); }
  double value() const { return value_; }

  friend ExtendedReal operator+(ExtendedReal a, ExtendedReal b) {
    return ExtendedReal(a.value_ + b.value_);
  }
  friend bool operator==(ExtendedReal a, ExtendedReal b) {
    return a.value_ == b.value_;
  }
  friend bool operator<(ExtendedReal a, ExtendedReal b) {
    return a.value_ < b.value_;
  }
  friend bool operator<=(ExtendedReal a, ExtendedReal b) {
    return a.value_ <= b.value_;
  }

 private:
  double value_ = 0.0;
};

}  // namespace proxent
