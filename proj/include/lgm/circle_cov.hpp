#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "lgm/levy_core.hpp"
#include "lgm/time_function.hpp"
#include "lgm/weights.hpp"

namespace lgm {

/// tau_k(t1, t2) = pi int_{t1 cap t2} a_k^{t1}(s) a_k^{t2}(s) g(s) ds over the shared time window of
/// full-angle ambit sets [t - T(t), t] (clipped to s >= 0).
double tau_k(const FourierWeight& weight, const ControlMeasure& control, const TimeFunction& lag, double t1, double t2,
             int k);

/// Full-angle circle model: Cov(R_{t1}(phi1), R_{t2}(phi2)) = 2 tau_0 + sum_{k>=1} tau_k cos(k (phi1 - phi2)),
/// valid for a factorizable basis with unit spot variance (scale by V(Z') otherwise).
class CircleCovModel {
 public:
  CircleCovModel(FourierWeight weight, ControlMeasure control, TimeFunction lag, double spot_variance = 1.0);

  double tau(int k, double t1, double t2) const;
  double cov(double t1, double phi1, double t2, double phi2) const;
  int k_max() const { return weight_.k_max(); }
  const FourierWeight& weight() const { return weight_; }
  const ControlMeasure& control() const { return control_; }
  const TimeFunction& lag() const { return lag_; }
  double spot_variance() const { return variance_; }

 private:
  FourierWeight weight_;
  ControlMeasure control_;
  TimeFunction lag_;
  double variance_;
};

double cov_full_angle(const CircleCovModel& model, double t1, double phi1, double t2, double phi2);

/// (2 a_0^2 + sum a_k^2 cos(k dphi)) / (2 a_0^2 + sum a_k^2).
double spatial_corr(std::span<const double> a, double dphi);
/// Same for an s-independent Fourier weight at time t. Throws AssumptionViolation otherwise.
double spatial_corr(const FourierWeight& weight, double t, double dphi);
/// int_{t1 cap t2} g / sqrt(int_{t1 - T(t1)}^{t1} g int_{t2 - T(t2)}^{t2} g).
double temporal_corr(const ControlMeasure& control, const TimeFunction& lag, double t1, double t2);

/// a_k^t = (1/sqrt(pi)) [lambda_k^t / int_{t - T(t)}^t g]^{1/2}, so that tau_k(t, t) = lambda_k^t.
/// Throws NegativeTargetCoefficient.
FourierWeight coeffs_from_target(std::function<double(int k, double t)> lambda, int k_max, ControlMeasure control,
                                 TimeFunction lag);
FourierWeight coeffs_from_target(const std::vector<double>& lambda, ControlMeasure control, TimeFunction lag);

struct PthOrderParams {
  int p = 1;
  double alpha = 1.0;
  double beta = 1.0;
};

/// 0 for k in {0, 1}, [alpha + beta (k^{2p} - 2^{2p})]^{-1} otherwise.
double pth_order_lambda(const PthOrderParams& params, int k);
/// Upper bound on sum_{k > k_max} lambda_k (k_max >= 3).
double pth_order_tail_bound(const PthOrderParams& params, int k_max);
/// Fourier weight realizing the p-th order model with truncation k_max.
FourierWeight pth_order_weight(const PthOrderParams& params, int k_max, ControlMeasure control, TimeFunction lag);

/// lambda_0 .. lambda_{n_out - 1} of mu(A_t(0) cap A_t(phi)) = sum_k lambda_k cos(k phi) from the cosine
/// coefficients gamma_k of hbar_t, by the closed-form series of the constant-weight geometry result:
///   lambda_0 = sum_{k odd} [2 pi - 16/(pi k^2)] gamma_k - 2 pi sum_{k even, k >= 0} gamma_k,
///   lambda_j = (16/pi) sum_{k odd} gamma_k / ((2j)^2 - k^2).
std::vector<double> lambda_from_hbar(std::span<const double> gamma, int n_out);

/// Cosine coefficients gamma_0 .. gamma_{n-1} of an even function on [-pi, pi] by Gauss-Legendre quadrature:
/// gamma_0 = (1/2pi) int f, gamma_k = (1/pi) int f cos(k phi).
std::vector<double> cosine_coefficients(const std::function<double(double)>& f, int n);

/// Rows t1, t2, dphi, cov.
void write_cov_table(std::ostream& os, const CircleCovModel& model, std::span<const double> times,
                     std::span<const double> lags);

}  // namespace lgm
