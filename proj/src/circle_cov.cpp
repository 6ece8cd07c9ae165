#include "lgm/circle_cov.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "lgm/ambit.hpp"
#include "lgm/io.hpp"

namespace lgm {

double tau_k(const FourierWeight& weight, const ControlMeasure& control, const TimeFunction& lag, double t1, double t2,
             int k) {
  if (k < 0) throw InvalidArgument("tau_k needs k >= 0");
  if (k > weight.k_max()) return 0.0;
  const auto overlap = time_overlap(t1, lag(t1), t2, lag(t2));
  if (!overlap) return 0.0;
  const double lo = std::max(overlap->lo, 0.0);
  const double hi = overlap->hi;
  if (!(hi > lo)) return 0.0;
  auto f = [&](double s) { return weight.a(k, t1, s) * weight.a(k, t2, s) * control.g(s); };
  const double scale = piecewise_gauss(f, lo, hi, {}, (hi - lo) / 32.0);
  const double tol = 1e-13 * std::max(std::abs(scale), 1e-300);
  return kPi * adaptive_simpson(f, lo, hi, tol, 32, 30);
}

CircleCovModel::CircleCovModel(FourierWeight weight, ControlMeasure control, TimeFunction lag, double spot_variance)
    : weight_(std::move(weight)), control_(std::move(control)), lag_(std::move(lag)), variance_(spot_variance) {
  if (!(spot_variance >= 0.0)) throw InvalidArgument("spot variance must be >= 0");
}

double CircleCovModel::tau(int k, double t1, double t2) const {
  return variance_ * tau_k(weight_, control_, lag_, t1, t2, k);
}

double CircleCovModel::cov(double t1, double phi1, double t2, double phi2) const {
  const double d = phi1 - phi2;
  double sum = 2.0 * tau(0, t1, t2);
  for (int k = 1; k <= weight_.k_max(); ++k) sum += tau(k, t1, t2) * std::cos(k * d);
  return sum;
}

double cov_full_angle(const CircleCovModel& model, double t1, double phi1, double t2, double phi2) {
  return model.cov(t1, phi1, t2, phi2);
}

double spatial_corr(std::span<const double> a, double dphi) {
  if (a.empty()) throw InvalidArgument("spatial correlation needs coefficients");
  double num = 2.0 * a[0] * a[0];
  double den = num;
  for (std::size_t k = 1; k < a.size(); ++k) {
    num += a[k] * a[k] * std::cos(static_cast<double>(k) * dphi);
    den += a[k] * a[k];
  }
  if (den == 0.0) throw InvalidArgument("spatial correlation undefined for a zero weight");
  return num / den;
}

double spatial_corr(const FourierWeight& weight, double t, double dphi) {
  if (!weight.s_independent())
    throw AssumptionViolation("spatial correlation formula needs coefficients a_k^t(s) = a_k^t");
  std::vector<double> a;
  for (int k = 0; k <= weight.k_max(); ++k) a.push_back(weight.a(k, t, t));
  return spatial_corr(a, dphi);
}

double temporal_corr(const ControlMeasure& control, const TimeFunction& lag, double t1, double t2) {
  const auto overlap = time_overlap(t1, lag(t1), t2, lag(t2));
  const double shared = overlap ? control.integral(std::max(overlap->lo, 0.0), overlap->hi) : 0.0;
  const double m1 = control.integral(std::max(t1 - lag(t1), 0.0), t1);
  const double m2 = control.integral(std::max(t2 - lag(t2), 0.0), t2);
  if (!(m1 > 0.0) || !(m2 > 0.0)) throw InvalidArgument("temporal correlation undefined for null ambit sets");
  return shared / std::sqrt(m1 * m2);
}

FourierWeight coeffs_from_target(std::function<double(int, double)> lambda, int k_max, ControlMeasure control,
                                 TimeFunction lag) {
  auto coeff = [lambda = std::move(lambda), control = std::move(control), lag = std::move(lag)](int k, double t, double) {
    const double l = lambda(k, t);
    if (l < 0.0)
      throw NegativeTargetCoefficient("target lambda_" + std::to_string(k) + " = " + format_double(l) + " < 0");
    if (l == 0.0) return 0.0;
    const double mass = control.integral(std::max(t - lag(t), 0.0), t);
    if (!(mass > 0.0)) throw InvalidArgument("target coefficients need a non-null time window");
    return std::sqrt(l / mass / kPi);
  };
  return FourierWeight(k_max, coeff, true);
}

FourierWeight coeffs_from_target(const std::vector<double>& lambda, ControlMeasure control, TimeFunction lag) {
  for (std::size_t k = 0; k < lambda.size(); ++k)
    if (lambda[k] < 0.0)
      throw NegativeTargetCoefficient("target lambda_" + std::to_string(k) + " = " + format_double(lambda[k]) + " < 0");
  return coeffs_from_target([lambda](int k, double) { return lambda[static_cast<std::size_t>(k)]; },
                            static_cast<int>(lambda.size()) - 1, std::move(control), std::move(lag));
}

double pth_order_lambda(const PthOrderParams& params, int k) {
  if (k < 0) throw InvalidArgument("pth order lambda needs k >= 0");
  if (params.p < 1 || !(params.alpha > 0.0) || !(params.beta > 0.0))
    throw InvalidArgument("pth order model needs p >= 1, alpha > 0, beta > 0");
  if (k <= 1) return 0.0;
  const double two_p = 2.0 * params.p;
  return 1.0 / (params.alpha + params.beta * (std::pow(k, two_p) - std::pow(2.0, two_p)));
}

double pth_order_tail_bound(const PthOrderParams& params, int k_max) {
  if (k_max < 3) throw InvalidArgument("tail bound needs k_max >= 3");
  const double two_p = 2.0 * params.p;
  const double shrink = 1.0 - std::pow(2.0 / k_max, two_p);
  return 1.0 / (params.beta * shrink * (two_p - 1.0) * std::pow(k_max, two_p - 1.0));
}

FourierWeight pth_order_weight(const PthOrderParams& params, int k_max, ControlMeasure control, TimeFunction lag) {
  pth_order_lambda(params, 0);
  return coeffs_from_target([params](int k, double) { return pth_order_lambda(params, k); }, k_max,
                            std::move(control), std::move(lag));
}

std::vector<double> lambda_from_hbar(std::span<const double> gamma, int n_out) {
  std::vector<double> lambda(static_cast<std::size_t>(std::max(n_out, 0)), 0.0);
  if (lambda.empty()) return lambda;
  for (std::size_t k = 0; k < gamma.size(); ++k) {
    const double kk = static_cast<double>(k);
    if (k % 2 == 1) lambda[0] += (kTwoPi - 16.0 / (kPi * kk * kk)) * gamma[k];
    else lambda[0] -= kTwoPi * gamma[k];
  }
  for (std::size_t j = 1; j < lambda.size(); ++j) {
    const double two_j = 2.0 * static_cast<double>(j);
    double sum = 0.0;
    for (std::size_t k = 1; k < gamma.size(); k += 2) {
      const double kk = static_cast<double>(k);
      sum += gamma[k] / (two_j * two_j - kk * kk);
    }
    lambda[j] = 16.0 / kPi * sum;
  }
  return lambda;
}

std::vector<double> cosine_coefficients(const std::function<double(double)>& f, int n) {
  std::vector<double> out(static_cast<std::size_t>(std::max(n, 0)));
  const double piece = kPi / std::max(8, 2 * n);
  for (int k = 0; k < n; ++k) {
    const double integral =
        piecewise_gauss([&](double x) { return f(x) * std::cos(k * x); }, -kPi, kPi, {}, piece);
    out[static_cast<std::size_t>(k)] = integral / (k == 0 ? kTwoPi : kPi);
  }
  return out;
}

void write_cov_table(std::ostream& os, const CircleCovModel& model, std::span<const double> times,
                     std::span<const double> lags) {
  os << "t1,t2,dphi,cov\n";
  for (double t1 : times)
    for (double t2 : times)
      for (double d : lags)
        os << format_double(t1) << ',' << format_double(t2) << ',' << format_double(d) << ','
           << format_double(model.cov(t1, 0.0, t2, d)) << '\n';
}

}  // namespace lgm
