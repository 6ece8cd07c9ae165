#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lgm/ambit.hpp"
#include "lgm/history.hpp"
#include "lgm/levy_core.hpp"
#include "lgm/weights.hpp"

namespace lgm {

enum class ModelKind {
  RateLinear,        // dR/dt = mu_t + int_{A_t} f Z, integrated through the time union
  DirectRadial,      // R_t = mu_t + int_{A_t} f Z
  DirectScaled,      // R_t = m(phi) (mu_t + int_{A_t} f Z)
  RateOfLog,         // d log R / dt = mu_t + int_{A_t} f Z
  ExponentialTumour  // R_t = exp(mu_t + int_{A_t} f Z) with the tumour weight
};

const char* to_string(ModelKind kind);

using AngleFn = std::function<double(double phi)>;

struct GrowthModelSpec {
  ModelKind kind = ModelKind::DirectRadial;
  DriftFunction drift;
  WeightFunction weight;
  BasisSpec basis;
  AmbitFamily ambit = FullAngle{TimeFunction::constant(1.0)};
  /// R_0(phi) for RateLinear and RateOfLog; zero (resp. one) when unset.
  AngleFn r0;
  /// Angular multiplier m(phi) for DirectScaled.
  AngleFn multiplier;
  /// Use the B_t cap C_phi time-union shortcut when the family allows it.
  bool use_shortcut = true;
  /// Free-form identifier stored in the history provenance.
  std::string tag;

  bool is_exponential() const { return kind == ModelKind::RateOfLog || kind == ModelKind::ExponentialTumour; }
  bool uses_time_union() const { return kind == ModelKind::RateLinear || kind == ModelKind::RateOfLog; }
};

/// The deterministic part of the model for R_t(phi): R = post(phi, base(phi) + X) with X the stochastic integral.
double deterministic_part(const GrowthModelSpec& spec, double t, double phi);
double apply_link(const GrowthModelSpec& spec, double phi, double linear);

/// Integrand of the stochastic term at time t: the weight f_t on A_t (direct models) or fbar_t on
/// Abar_t (rate models), as a function of cyclic offset and time.
class StochasticKernel {
 public:
  StochasticKernel(const GrowthModelSpec& spec, double t);

  double t() const { return t_; }
  /// Kernel value at cyclic offset delta in [0, pi] and time s; zero outside the region.
  double operator()(double delta, double s) const;
  bool contains(double delta, double s) const;
  /// Upper bound on the angular half-width of the region at time s (negative when empty).
  double half_width(double s) const;
  /// Time window of the region, clipped to the support of g.
  Interval window() const;
  /// Kernel on grid rows (grid midpoints) by column offset m = 0..n-1.
  Eigen::MatrixXd on_grid(const GridSpec& grid) const;

 private:
  std::shared_ptr<const GrowthModelSpec> spec_;
  double t_;
  std::shared_ptr<const TimeUnion> union_;
};

/// The region behind a kernel, usable with integrate().
struct KernelRegion {
  const StochasticKernel* kernel;
  double phi;

  bool contains(double theta, double s) const { return kernel->contains(cyclic_distance(theta, phi), s); }
  Interval window() const { return kernel->window(); }
};

/// Precomputes kernels for a model, grid and list of times; simulations then cost one FFT pass per row.
class GrowthSimulator {
 public:
  GrowthSimulator(GrowthModelSpec spec, GridSpec grid, std::vector<double> times);

  const GrowthModelSpec& spec() const { return spec_; }
  const GridSpec& grid() const { return grid_; }
  const std::vector<double>& times() const { return times_; }
  const StochasticKernel& kernel(std::size_t i) const { return kernels_[i]; }

  BasisRealization realize(std::uint64_t seed) const { return sample_realization(spec_.basis, grid_, seed); }
  /// Stochastic terms X_t(phi_j), one row per requested time.
  Eigen::MatrixXd stochastic_terms(const BasisRealization& z) const;
  GrowthHistory simulate(std::uint64_t seed) const;
  GrowthHistory from_terms(const Eigen::MatrixXd& terms, std::uint64_t seed) const;

 private:
  GrowthModelSpec spec_;
  GridSpec grid_;
  std::vector<double> times_;
  std::vector<StochasticKernel> kernels_;
  // Per time: first grid row of the kernel window and the (real, symmetric-kernel) row spectra.
  std::vector<int> row0_;
  std::vector<Eigen::MatrixXd> kernel_spectra_;
  int row_lo_ = 0;
  int row_hi_ = -1;
};

/// R_t(phi) on the grid angles for each requested time. Deterministic in (spec, grid, seed, times).
GrowthHistory simulate(const GrowthModelSpec& spec, const GridSpec& grid, std::uint64_t seed,
                       const std::vector<double>& times);

struct OutburstView {
  /// Embedded outburst points (R_{t_i}(theta_i) cos theta_i, R_{t_i}(theta_i) sin theta_i), t_i <= t.
  std::vector<PlanarPoint> points;
  /// Raw (theta_i, t_i) of the same points.
  std::vector<PoissonPoint> support;
  /// Per grid angle: the sum of f_t over outbursts inside A_t(phi).
  Eigen::VectorXd rate_terms;
  /// The same quantity through integrate() on the realization.
  Eigen::VectorXd rate_terms_integrated;
};

/// The point-process reading of a Poisson rate model at time t. Throws WrongBasisKind for other bases.
OutburstView poisson_outburst_view(const GrowthModelSpec& spec, const GridSpec& grid, std::uint64_t seed, double t);

struct GammaMatch {
  double drift;  // mu~_t
  double rate;   // alpha
};
/// Gamma(beta m, alpha) basis with the mean and variance of mu_t + N(0, sigma2 m).
GammaMatch moment_match_gamma(double mu_t, double sigma2, double beta, double m);

struct InverseGaussianMatch {
  double eta;
  double gamma;
};
/// IG(eta m, gamma) with mean mean_z and variance var_z on a region of measure m.
InverseGaussianMatch moment_match_ig(double mean_z, double var_z, double m);

/// mu(A_t(0)) summed over the grid cells whose midpoints lie in A_t(0): the measure a simulation sees.
double mesh_measure(const AmbitFamily& family, double t, const ControlMeasure& control, const GridSpec& grid);

/// Turns a Gaussian direct model with f = 1 (zero-drift spot, variance sigma2) into a Gamma or IG model with
/// the same mean and variance of R_t at `times`, using `measure(t)` for mu(A_t(0)). Both pick
/// E Z(A) = sigma sqrt(beta) m and shift the drift table accordingly.
GrowthModelSpec gamma_matched(const GrowthModelSpec& gaussian, double beta, const std::function<double(double)>& measure,
                              const std::vector<double>& times);
GrowthModelSpec ig_matched(const GrowthModelSpec& gaussian, double beta, const std::function<double(double)>& measure,
                           const std::vector<double>& times);

/// Published parameterizations: ex3, ex4, ex5, ex6, tumour. Throws UnknownId.
GrowthModelSpec example_preset(const std::string& id);
/// Default grid and output times for a preset.
GridSpec preset_grid(const std::string& id);
std::vector<double> preset_times(const std::string& id);

/// Rows t, phi, r.
void write_history_csv(std::ostream& os, const GrowthHistory& history);
/// Rows t, x, y tracing each profile as a closed polyline.
void write_polylines_csv(std::ostream& os, const GrowthHistory& history);
/// Rows x, y.
void write_embedding_csv(std::ostream& os, const Embedding& embedding);

}  // namespace lgm
