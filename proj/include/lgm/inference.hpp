#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lgm/fourier_radial.hpp"
#include "lgm/growth.hpp"
#include "lgm/history.hpp"
#include "lgm/moments.hpp"
#include "lgm/optimize.hpp"

namespace lgm {

/// Radial profiles on a common uniform angular grid, one matrix (times x angles) per replicate.
struct ProfileDataset {
  std::vector<double> times;
  std::vector<double> angles;  // increasing, in [-pi, pi)
  std::vector<Eigen::MatrixXd> radii;

  int replicates() const { return static_cast<int>(radii.size()); }
  int n_angles() const { return static_cast<int>(angles.size()); }
  bool all_positive() const;
  /// Profiles at time index i, one row per replicate.
  Eigen::MatrixXd at_time(std::size_t i) const;
};

/// CSV with header t,phi,r or t,phi,r,replicate (any column order); lines starting with '#' are skipped.
/// Throws MalformedFile, NonUniformGrid and, with require_positive, NonPositiveRadius.
ProfileDataset read_profiles_csv(std::istream& is, bool require_positive = false);
/// Only "csv" is supported.
ProfileDataset ingest_profiles(const std::string& path, const std::string& format = "csv",
                               bool require_positive = false);
/// One replicate per history; all histories must share times and grid.
ProfileDataset dataset_from_histories(std::span<const GrowthHistory> histories);
/// Rows t, phi, r, replicate.
void write_profiles_csv(std::ostream& os, const ProfileDataset& dataset);

struct EmpiricalMoments {
  std::vector<double> times;
  std::vector<int> lag_steps;  // lag ladder in grid steps, starting at 0
  double dphi = 0.0;
  Eigen::VectorXd mean;          // per time
  Eigen::VectorXd variance;      // per time
  Eigen::MatrixXd spatial_cov;   // (times, lags); column 0 is the variance
  Eigen::MatrixXd temporal_cov;  // (times, times) at lag 0
  int replicates = 0;

  double lag(std::size_t i) const { return lag_steps[i] * dphi; }
};

/// Distinct grid steps round(i * (n/2) / (n_lags - 1)), i = 0..n_lags-1, covering [0, pi].
std::vector<int> lag_ladder(int n_angles, int n_lags = 16);

/// With two or more replicates: unbiased sample moments across replicates, averaged over angles. With one
/// replicate: angular averages (the angle plays the role of the replicate). Throws InsufficientData.
EmpiricalMoments empirical_moments(const ProfileDataset& dataset, int n_lags = 16);

/// The same quantities from the model: mean, variance and covariances of R at the grid angle nearest 0
/// and its lagged neighbours.
EmpiricalMoments analytic_moments(const GrowthModelSpec& spec, const GridSpec& grid, std::span<const double> times,
                                  std::span<const int> lag_steps, MomentMode mode = MomentMode::Mesh);

/// Sum over times and lags of ((empirical - model) / empirical variance)^2, plus the squared standardized mean
/// error per time when match_mean is set.
double moment_objective(const EmpiricalMoments& empirical, const EmpiricalMoments& model, bool match_mean = false);

using ModelFactory = std::function<GrowthModelSpec(std::span<const double> params)>;

struct MomentFitProblem {
  ModelFactory model;
  std::vector<ParamSpec> params;
  GridSpec grid{100, 1.0, 0.0, 1.0};
  MomentMode mode = MomentMode::Mesh;
  bool match_mean = false;
};

/// Method of moments. The result is flagged non-identifiable when the Hessian of the objective at the
/// optimum is numerically singular.
FitResult fit_moments(const MomentFitProblem& problem, const EmpiricalMoments& empirical,
                      const FitOptions& options = {});
/// Checks positivity of the radii for exponential models, then fits the dataset's empirical moments.
FitResult fit_moments(const MomentFitProblem& problem, const ProfileDataset& dataset, const FitOptions& options = {},
                      int n_lags = 16);

/// ex4 family with free (sigma2, Theta): Gaussian spot variance and Rectangular half-width.
MomentFitProblem ex4_fit_problem(const GridSpec& grid);
/// Tumour family with free (alpha, beta) at the table row used for time t; the other rows keep their values.
/// alpha is restricted to [0, alpha_max] since its sign does not change the law of the model.
MomentFitProblem tumour_fit_problem(const GridSpec& grid, double t, const SpotLaw& spot, double drift);

using TauFamily = std::function<TauFn(std::span<const double> params)>;

struct FourierMleProblem {
  TauFamily tau;
  std::vector<ParamSpec> params;
  int k_lo = 1;
  int k_hi = 6;
};

/// Maximizes the summed gaussian_loglik of every replicate over the declared parameters. Orders k >= 1 only,
/// so that an angle-independent drift drops out. Throws SingularCovariance and NonConvergence.
FitResult fit_fourier_mle(const FourierMleProblem& problem, const ProfileDataset& dataset,
                          const FitOptions& options = {});
/// Same on precomputed coefficient series.
FitResult fit_fourier_mle(const FourierMleProblem& problem, std::span<const FourierSeries> series,
                          const FitOptions& options = {});

/// Fourier coefficients of every replicate.
std::vector<FourierSeries> dataset_fourier(const ProfileDataset& dataset, int k_max);

}  // namespace lgm
