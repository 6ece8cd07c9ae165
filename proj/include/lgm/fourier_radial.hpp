#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "lgm/ambit.hpp"
#include "lgm/circle_cov.hpp"
#include "lgm/history.hpp"

namespace lgm {

/// A_k^t = (1/pi) int R_t cos(k phi) dphi and B_k^t = (1/pi) int R_t sin(k phi) dphi for k = 0..k_max,
/// evaluated by the trapezoid rule on the midpoint grid phi_i = -pi + (i + 1/2) 2pi/n
/// (exact for trigonometric polynomials of degree < n).
struct FourierSeries {
  std::vector<double> times;
  Eigen::MatrixXd a;  // (times, k_max + 1)
  Eigen::MatrixXd b;
  int k_max = 0;

  /// A_0/2 + sum_k (A_k cos k phi + B_k sin k phi) for time index i.
  double reconstruct(std::size_t i, double phi) const;
  /// (1/pi) int R^2 dphi recovered as A_0^2/2 + sum_k (A_k^2 + B_k^2).
  double parseval(std::size_t i) const;
};

/// Throws AliasError unless 2 k_max < n.
FourierSeries radial_fourier(const Eigen::VectorXd& profile, int k_max, double t = 0.0);
FourierSeries radial_fourier(const GrowthHistory& history, int k_max);

struct FourierCov {
  double aa;  // Cov(A_k^t, A_j^t')
  double bb;  // Cov(B_k^t, B_j^t')
  double ab;  // Cov(A_k^t, B_j^t')
};

/// Covariances of the Fourier coefficients under a full-angle model: tau_k(t, t') for k = j >= 1, zero across
/// orders and between A and B. For k = j = 0 the A channel is 2 int a_0 Z with variance 8 tau_0 and B_0 = 0.
FourierCov fourier_cov_structure(const CircleCovModel& model, double t, double t2, int k, int j);
/// Same, checking that the ambit family is full-angle. Throws AssumptionViolation otherwise.
FourierCov fourier_cov_structure(const AmbitFamily& ambit, const CircleCovModel& model, double t, double t2, int k,
                                 int j);

/// tau(k, t, t') for the likelihood.
using TauFn = std::function<double(int k, double t, double t2)>;

/// Sum over k in [k_lo, k_hi] of the zero-mean multivariate normal log-densities of (A_k^{t_1..t_n}) and
/// (B_k^{t_1..t_n}), each with covariance [tau(k, t_i, t_j)]. Subtract the mean beforehand.
/// Throws SingularCovariance.
double gaussian_loglik(const FourierSeries& series, int k_lo, int k_hi, const TauFn& tau);

/// Rows t, k, A, B.
void write_fourier_csv(std::ostream& os, const FourierSeries& series);

}  // namespace lgm
