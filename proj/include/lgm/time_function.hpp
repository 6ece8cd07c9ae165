#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace lgm {

/// Scalar function of time (a lag T(t), an angular extent Theta(s), a drift, ...).
/// Keeps the constant value around when there is one so callers can take closed-form paths.
class TimeFunction {
 public:
  TimeFunction() : TimeFunction(constant(0.0)) {}

  static TimeFunction constant(double c) {
    TimeFunction f([c](double) { return c; });
    f.constant_ = c;
    return f;
  }
  /// c * t.
  static TimeFunction proportional(double c) { return TimeFunction([c](double t) { return c * t; }); }
  /// Piecewise linear through (knots, values), flat beyond the ends.
  static TimeFunction table(std::vector<double> knots, std::vector<double> values);

  explicit TimeFunction(std::function<double(double)> fn) : fn_(std::move(fn)) {}

  double operator()(double t) const { return fn_(t); }
  const std::optional<double>& constant_value() const { return constant_; }

 private:
  std::function<double(double)> fn_;
  std::optional<double> constant_;
};

}  // namespace lgm
