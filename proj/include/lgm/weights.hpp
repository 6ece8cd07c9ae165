#pragma once

#include <functional>
#include <optional>
#include <type_traits>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "lgm/levy_core.hpp"
#include "lgm/time_function.hpp"
#include "lgm/tumour.hpp"

namespace lgm {

/// a_k^t(s) for k = 0..k_max, so that f_t((theta, s); phi) = a_0 + sum_k a_k cos(k (theta - phi)).
class FourierWeight {
 public:
  using CoeffFn = std::function<double(int k, double t, double s)>;

  FourierWeight() = default;
  FourierWeight(int k_max, CoeffFn coeff, bool s_independent, std::optional<std::vector<double>> separable_c = {});

  /// a_k^t(s) = a[k].
  static FourierWeight constant(std::vector<double> a);
  /// a_k^t(s) = b(t) c[k].
  static FourierWeight separable(TimeFunction b, std::vector<double> c);
  /// a_k^t(s) = b[k](t - s).
  static FourierWeight stationary(std::vector<std::function<double(double)>> b);
  /// a_k^t(s) piecewise linear in s through table(k, j) at s_knots[j], flat outside.
  static FourierWeight tabulated(std::vector<double> s_knots, Eigen::MatrixXd table);

  int k_max() const { return k_max_; }
  double a(int k, double t, double s) const { return k > k_max_ ? 0.0 : coeff_(k, t, s); }
  /// f_t at cyclic offset delta.
  double value(double t, double delta, double s) const;
  bool s_independent() const { return s_independent_; }
  /// c_k when the weight is of the form b_t c_k.
  const std::optional<std::vector<double>>& separable_c() const { return c_; }

 private:
  int k_max_ = -1;
  CoeffFn coeff_ = [](int, double, double) { return 0.0; };
  bool s_independent_ = true;
  std::optional<std::vector<double>> c_;
};

struct ConstantWeight {
  double c = 1.0;
};

/// alpha(t) cos(phi - theta) on [t - T, t - t0] plus beta(t) on the shrinking band over [t - t0, t].
struct TumourWeight {
  TumourTable table;
};

/// Arbitrary f_t(delta, s) with delta the cyclic offset from phi.
struct CustomWeight {
  std::function<double(double t, double delta, double s)> fn;
};

/// Weight functions are cyclic: they depend on (theta, phi) only through d(theta, phi).
class WeightFunction {
 public:
  using Kind = std::variant<ConstantWeight, FourierWeight, TumourWeight, CustomWeight>;

  WeightFunction() : kind_(ConstantWeight{}) {}
  WeightFunction(Kind kind) : kind_(std::move(kind)) {}  // NOLINT
  template <class W>
    requires std::is_constructible_v<Kind, W>
  WeightFunction(W w) : kind_(std::move(w)) {}  // NOLINT

  double operator()(double t, double delta, double s) const;
  std::optional<double> constant_value() const;
  const Kind& kind() const { return kind_; }

 private:
  Kind kind_;
};

struct ConstantDrift {
  double c = 0.0;
};

/// Drift table over time; `values` has one column (angle-independent) or one column per angle of the
/// midpoint grid phi_j = -pi + (j + 1/2) 2 pi / n, interpolated cyclically.
struct TableDrift {
  std::vector<double> knots;
  Eigen::MatrixXd values;
  bool step = false;  // piecewise constant (last knot <= t) instead of piecewise linear
};

/// Gompertz rate kappa0 exp[(eta/gamma)(1 - e^{-gamma t})] eta e^{-gamma t}.
struct GompertzDrift {
  double kappa0;
  double eta;
  double gamma;
};

class DriftFunction {
 public:
  using Kind = std::variant<ConstantDrift, TableDrift, GompertzDrift>;

  DriftFunction() : kind_(ConstantDrift{}) {}
  DriftFunction(Kind kind);  // NOLINT
  template <class D>
    requires std::is_constructible_v<Kind, D>
  DriftFunction(D d) : DriftFunction(Kind(std::move(d))) {}  // NOLINT

  static DriftFunction table(std::vector<double> knots, std::vector<double> values, bool step = false);

  /// mu_t(phi).
  double operator()(double t, double phi) const;
  /// \int_0^t mu_s(phi) ds.
  double integral(double t, double phi) const;
  const Kind& kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace lgm
