#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lgm/growth.hpp"

namespace lgm {

struct EvalPoint {
  double t;
  double phi;
};

/// How integrals against mu are evaluated.
///  Mesh: sum over the simulation grid cells (midpoint rule), i.e. exactly what a simulation sees.
///  Fine: the same on a 4x refined grid.
///  Exact: nested adaptive quadrature (Simpson over s, Gauss-Legendre over theta split at arc edges).
/// Poisson bases are simulated with exact point positions, so Mesh and Fine fall back to Exact for them.
enum class MomentMode { Mesh, Fine, Exact };

/// Analytic moments of the linear form L_t(phi) = D_t(phi) + X_t(phi), X_t(phi) = int K_t(d(theta, phi), s) Z(dxi),
/// where D is the deterministic part and K the model kernel (f_t on A_t, or fbar_t on Abar_t).
class MomentEngine {
 public:
  MomentEngine(GrowthModelSpec spec, GridSpec grid, MomentMode mode = MomentMode::Mesh);

  const GrowthModelSpec& spec() const { return spec_; }
  const GridSpec& grid() const { return grid_; }
  MomentMode mode() const { return mode_; }

  /// E L = D + int K E(Z') dmu.
  double mean_linear(EvalPoint p) const;
  /// Var L = int K^2 V(Z') dmu.
  double var_linear(EvalPoint p) const;
  /// Cov(L_1, L_2) = int K_1 K_2 V(Z') dmu.
  double cov_linear(EvalPoint p1, EvalPoint p2) const;
  /// E prod_j exp(lambda_j X_j) = exp(int K(sum_j lambda_j K_j) dmu). Throws KumulantDomainError.
  double mixed_exponential_moment(std::span<const EvalPoint> points, std::span<const double> lambda) const;
  /// E[e^{X_1} e^{X_2}] / (E e^{X_1} E e^{X_2}) = exp(int [K(K_1 + K_2) - K(K_1) - K(K_2)] dmu).
  double relative_second_moment(EvalPoint p1, EvalPoint p2) const;

  /// int F(spot(xi), K_1(xi), ..., K_n(xi)) mu(dxi) under the engine's mode.
  using FieldFn = std::function<double(const SpotLaw& spot, std::span<const double> k)>;
  double integrate_field(std::span<const EvalPoint> points, const FieldFn& fn) const;

 private:
  const StochasticKernel& kernel_at(double t) const;
  double mesh_integral(const GridSpec& grid, std::span<const EvalPoint> points, const FieldFn& fn) const;
  double exact_integral(std::span<const EvalPoint> points, const FieldFn& fn) const;

  GrowthModelSpec spec_;
  GridSpec grid_;
  MomentMode mode_;
  mutable std::mutex mutex_;
  mutable std::map<double, StochasticKernel> kernels_;
};

/// Constant-weight overlap exponent K(2f) - 2K(f) of the relative second moment.
double c_bar(const SpotLaw& spot, double f);

// ---------------------------------------------------------------------------
// Monte Carlo cross-checks
// ---------------------------------------------------------------------------

struct Estimate {
  double value;
  double se;
};

/// Delete-one jackknife for a smooth function of feature means; `features` has one row per replicate.
Estimate jackknife(const Eigen::MatrixXd& features, const std::function<double(const Eigen::VectorXd& means)>& stat);

enum class QueryKind { Mean, Variance, Covariance, RelativeSecondMoment, MixedExponential };
const char* to_string(QueryKind kind);

struct MomentQuery {
  QueryKind kind;
  std::vector<EvalPoint> points;
  std::vector<double> lambda;  // MixedExponential only
  std::string label;
};

struct VerifyRecord {
  MomentQuery query;
  double analytic;
  double mc;
  double se;
  double z;
  bool flagged;  // |z| > 3
};

struct VerifyReport {
  std::vector<VerifyRecord> records;
  int replicates;
  std::uint64_t seed;
  bool all_pass() const;
};

/// Evaluation angles are snapped to the nearest grid angle (the analytic side uses the snapped angle too).
VerifyReport mc_verify(const GrowthModelSpec& spec, const GridSpec& grid, std::vector<MomentQuery> queries,
                       int replicates, std::uint64_t seed, int threads = 0, MomentMode mode = MomentMode::Mesh);

/// Grid angle nearest to phi.
double snap_to_grid(const GridSpec& grid, double phi);

}  // namespace lgm
