#include "lgm/fourier_radial.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include <Eigen/Cholesky>

#include "lgm/io.hpp"

namespace lgm {

double FourierSeries::reconstruct(std::size_t i, double phi) const {
  const auto r = static_cast<Eigen::Index>(i);
  double sum = 0.5 * a(r, 0);
  for (int k = 1; k <= k_max; ++k) sum += a(r, k) * std::cos(k * phi) + b(r, k) * std::sin(k * phi);
  return sum;
}

double FourierSeries::parseval(std::size_t i) const {
  const auto r = static_cast<Eigen::Index>(i);
  return 0.5 * a(r, 0) * a(r, 0) + a.row(r).tail(k_max).squaredNorm() + b.row(r).tail(k_max).squaredNorm();
}

namespace {

void fill_row(const Eigen::RowVectorXd& profile, int k_max, Eigen::MatrixXd& a, Eigen::MatrixXd& b, Eigen::Index row) {
  const Eigen::Index n = profile.size();
  const double dphi = kTwoPi / static_cast<double>(n);
  for (int k = 0; k <= k_max; ++k) {
    double sa = 0.0;
    double sb = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double phi = -kPi + (static_cast<double>(i) + 0.5) * dphi;
      sa += profile[i] * std::cos(k * phi);
      sb += profile[i] * std::sin(k * phi);
    }
    a(row, k) = sa * dphi / kPi;
    b(row, k) = k == 0 ? 0.0 : sb * dphi / kPi;
  }
}

void check_alias(Eigen::Index n, int k_max) {
  if (k_max < 0 || 2 * static_cast<Eigen::Index>(k_max) >= n)
    throw AliasError("order " + std::to_string(k_max) + " needs more than " + std::to_string(2 * k_max) +
                     " angles, got " + std::to_string(n));
}

}  // namespace

FourierSeries radial_fourier(const Eigen::VectorXd& profile, int k_max, double t) {
  check_alias(profile.size(), k_max);
  FourierSeries out;
  out.times = {t};
  out.k_max = k_max;
  out.a.resize(1, k_max + 1);
  out.b.resize(1, k_max + 1);
  fill_row(profile.transpose(), k_max, out.a, out.b, 0);
  return out;
}

FourierSeries radial_fourier(const GrowthHistory& history, int k_max) {
  check_alias(history.radii.cols(), k_max);
  FourierSeries out;
  out.times = history.times;
  out.k_max = k_max;
  const Eigen::Index n = history.radii.rows();
  out.a.resize(n, k_max + 1);
  out.b.resize(n, k_max + 1);
  for (Eigen::Index i = 0; i < n; ++i) fill_row(history.radii.row(i), k_max, out.a, out.b, i);
  return out;
}

FourierCov fourier_cov_structure(const CircleCovModel& model, double t, double t2, int k, int j) {
  if (k < 0 || j < 0) throw InvalidArgument("Fourier orders must be >= 0");
  if (k != j) return {0.0, 0.0, 0.0};
  if (k == 0) return {8.0 * model.tau(0, t, t2), 0.0, 0.0};
  const double tau = model.tau(k, t, t2);
  return {tau, tau, 0.0};
}

FourierCov fourier_cov_structure(const AmbitFamily& ambit, const CircleCovModel& model, double t, double t2, int k,
                                 int j) {
  if (!std::holds_alternative<FullAngle>(ambit))
    throw AssumptionViolation("Fourier coefficient covariances need full-angle ambit sets");
  return fourier_cov_structure(model, t, t2, k, j);
}

double gaussian_loglik(const FourierSeries& series, int k_lo, int k_hi, const TauFn& tau) {
  if (k_lo < 0 || k_hi > series.k_max || k_lo > k_hi) throw InvalidArgument("likelihood order range out of bounds");
  const auto n = static_cast<Eigen::Index>(series.times.size());
  const double log_2pi = std::log(kTwoPi);
  double total = 0.0;
  for (int k = k_lo; k <= k_hi; ++k) {
    Eigen::MatrixXd cov(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index l = 0; l <= i; ++l) cov(i, l) = cov(l, i) = tau(k, series.times[i], series.times[l]);
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    const Eigen::VectorXd diag = llt.matrixL().toDenseMatrix().diagonal();
    if (llt.info() != Eigen::Success || !(diag.minCoeff() > 1e-7 * std::sqrt(cov.diagonal().maxCoeff())))
      throw SingularCovariance("covariance of order " + std::to_string(k) + " is not positive definite");
    const double log_det = 2.0 * diag.array().log().sum();
    const int channels = k == 0 ? 1 : 2;
    for (int c = 0; c < channels; ++c) {
      const Eigen::VectorXd x = c == 0 ? series.a.col(k) : series.b.col(k);
      const double quad = llt.matrixL().solve(x).squaredNorm();
      total += -0.5 * (static_cast<double>(n) * log_2pi + log_det + quad);
    }
  }
  return total;
}

void write_fourier_csv(std::ostream& os, const FourierSeries& series) {
  os << "t,k,A,B\n";
  for (std::size_t i = 0; i < series.times.size(); ++i)
    for (int k = 0; k <= series.k_max; ++k)
      os << format_double(series.times[i]) << ',' << k << ','
         << format_double(series.a(static_cast<Eigen::Index>(i), k)) << ','
         << format_double(series.b(static_cast<Eigen::Index>(i), k)) << '\n';
}

}  // namespace lgm
