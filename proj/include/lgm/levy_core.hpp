#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "lgm/error.hpp"
#include "lgm/quadrature.hpp"

namespace lgm {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// ---------------------------------------------------------------------------
// Spot laws Z'(xi)
// ---------------------------------------------------------------------------

/// N(drift, variance) spot; drift and variance are densities with respect to the control measure.
struct GaussianSpot {
  double drift = 0.0;
  double variance = 1.0;
};

/// Po(1) spot (unit rate per unit of control measure).
struct PoissonSpot {};

/// Gamma(shape, rate) spot: Z(A) ~ Gamma(shape * mu(A), rate).
struct GammaSpot {
  double shape = 1.0;  // beta
  double rate = 1.0;   // alpha
};

/// IG(eta, gamma) spot: Z(A) ~ IG(eta * mu(A), gamma), mean eta/gamma, variance eta/gamma^3.
struct InverseGaussianSpot {
  double eta = 1.0;
  double gamma = 1.0;
};

using SpotLaw = std::variant<GaussianSpot, PoissonSpot, GammaSpot, InverseGaussianSpot>;

enum class BasisKind { Gaussian, Poisson, Gamma, InverseGaussian };

BasisKind kind_of(const SpotLaw& spot);
const char* to_string(BasisKind kind);

/// Throws InvalidArgument when a parameter violates its positivity constraint.
void validate(const SpotLaw& spot);

/// log E exp(i lambda Z').
std::complex<double> cumulant(const SpotLaw& spot, double lambda);

/// Supremum of the Laplace domain: the kumulant is finite for theta strictly below it.
double kumulant_bound(const SpotLaw& spot);

/// K(theta) = log E exp(theta Z'). Throws KumulantDomainError outside the Laplace domain.
double kumulant(const SpotLaw& spot, double theta);

double spot_mean(const SpotLaw& spot);
double spot_variance(const SpotLaw& spot);

// ---------------------------------------------------------------------------
// Control measure mu(dtheta ds) = g(s) ds dtheta, g supported on s >= 0
// ---------------------------------------------------------------------------

class ControlMeasure {
 public:
  struct Constant { double c; };
  struct Linear { double a; };
  struct Exponential { double a, b; };
  struct Power { double a, alpha; };
  struct Tabulated { std::vector<double> knots, values; };  // piecewise linear, zero outside the knots
  using Density = std::variant<Constant, Linear, Exponential, Power, Tabulated>;

  /// Lebesgue measure on the half-cylinder s >= 0.
  ControlMeasure() : density_(Constant{1.0}) {}
  explicit ControlMeasure(Density density);

  static ControlMeasure lebesgue() { return ControlMeasure{}; }
  static ControlMeasure constant(double c) { return ControlMeasure(Constant{c}); }
  static ControlMeasure linear(double a) { return ControlMeasure(Linear{a}); }
  static ControlMeasure exponential(double a, double b) { return ControlMeasure(Exponential{a, b}); }
  static ControlMeasure power(double a, double alpha) { return ControlMeasure(Power{a, alpha}); }
  static ControlMeasure tabulated(std::vector<double> knots, std::vector<double> values);

  const Density& density() const { return density_; }

  /// g(s); zero for s < 0.
  double g(double s) const;
  /// \int_0^s g.
  double cumulative(double s) const;
  /// \int_lo^hi g(s) ds.
  double integral(double lo, double hi) const;
  double integral(Interval iv) const { return iv.empty() ? 0.0 : integral(iv.lo, iv.hi); }
  /// Upper bound of g on [lo, hi], used as a rejection envelope.
  double max_on(double lo, double hi) const;

 private:
  Density density_;
};

// ---------------------------------------------------------------------------
// Bases, grids and realizations
// ---------------------------------------------------------------------------

/// Spot law per cell for non-factorizable bases; called with the cell midpoint.
using CellSpotFn = std::function<SpotLaw(double theta, double s)>;

struct BasisSpec {
  SpotLaw spot = GaussianSpot{};
  ControlMeasure control;
  /// Piecewise-constant (per grid cell) spot field. Must keep the kind of `spot`.
  CellSpotFn cell_spot;

  bool factorizable() const { return !static_cast<bool>(cell_spot); }
  BasisKind kind() const { return kind_of(spot); }
  SpotLaw spot_at(double theta, double s) const { return cell_spot ? cell_spot(theta, s) : spot; }
};

/// Uniform angle/time grid over [-pi, pi) x [t_min, t_max].
class GridSpec {
 public:
  GridSpec(int n_angles, double dt, double t_min, double t_max);
  /// Checks that 2 pi / dphi is an integer.
  static GridSpec from_dphi(double dphi, double dt, double t_min, double t_max);

  int n_angles() const { return n_angles_; }
  int n_rows() const { return n_rows_; }
  double dphi() const { return kTwoPi / n_angles_; }
  double dt() const { return dt_; }
  double t_min() const { return t_min_; }
  double t_max() const { return t_max_; }
  Interval window() const { return {t_min_, t_max_}; }

  double angle_lo(int col) const { return -kPi + col * dphi(); }
  double angle_mid(int col) const { return -kPi + (col + 0.5) * dphi(); }
  double row_lo(int row) const { return t_min_ + row * dt_; }
  double row_hi(int row) const { return row + 1 == n_rows_ ? t_max_ : t_min_ + (row + 1) * dt_; }
  double row_mid(int row) const { return 0.5 * (row_lo(row) + row_hi(row)); }
  /// Column holding angle theta (wrapped).
  int col_of(double theta) const;
  /// Row holding time s, clamped to the grid.
  int row_of(double s) const;

  /// Grid with `factor` times finer cells in both axes.
  GridSpec refined(int factor) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  int n_angles_;
  int n_rows_;
  double dt_;
  double t_min_;
  double t_max_;
};

struct PoissonPoint {
  double theta;
  double s;
};

/// One draw of the basis on a grid: per-cell increments and, for Poisson bases, the support points.
class BasisRealization {
 public:
  BasisRealization(GridSpec grid, BasisKind kind, std::uint64_t seed, Eigen::MatrixXd increments,
                   std::vector<PoissonPoint> points, std::vector<int> row_offsets);

  const GridSpec& grid() const { return grid_; }
  BasisKind kind() const { return kind_; }
  std::uint64_t seed() const { return seed_; }
  /// increments()(row, col) = Z(cell).
  const Eigen::MatrixXd& increments() const { return increments_; }
  /// All Poisson points ordered by row.
  std::span<const PoissonPoint> points() const { return points_; }
  std::span<const PoissonPoint> points_in_row(int row) const;

 private:
  GridSpec grid_;
  BasisKind kind_;
  std::uint64_t seed_;
  Eigen::MatrixXd increments_;
  std::vector<PoissonPoint> points_;
  std::vector<int> row_offsets_;
};

/// mu(cell) for a cell in `row` (identical across columns).
double cell_measure(const GridSpec& grid, const ControlMeasure& control, int row);

/// Samples independent exact marginals per cell. Deterministic in (spec, grid, seed).
BasisRealization sample_realization(const BasisSpec& spec, const GridSpec& grid, std::uint64_t seed);

/// Writes rows theta_lo, theta_hi, t_lo, t_hi, increment.
void write_realization_csv(std::ostream& os, const BasisRealization& z);

// ---------------------------------------------------------------------------
// Regions and stochastic integration
// ---------------------------------------------------------------------------

/// Cyclic wrap to [-pi, pi).
double wrap_angle(double phi);
/// Cyclic distance in [0, pi].
double cyclic_distance(double a, double b);

struct CellRect {
  double theta_lo, theta_hi, s_lo, s_hi;
};

/// Finite union of disjoint half-open rectangles [theta_lo, theta_hi) x [s_lo, s_hi), angles in [-pi, pi].
class RectRegion {
 public:
  RectRegion() = default;
  explicit RectRegion(std::vector<CellRect> rects);

  static RectRegion full_angle(double s_lo, double s_hi) { return RectRegion({{-kPi, kPi, s_lo, s_hi}}); }

  bool contains(double theta, double s) const;
  Interval window() const;
  const std::vector<CellRect>& rects() const { return rects_; }

 private:
  std::vector<CellRect> rects_;
};

/// mu(region); exact through the antiderivative of g. Throws UnboundedRegion for infinite extents.
double measure_of(const RectRegion& region, const ControlMeasure& control);

/// Anything with `bool contains(theta, s)` and `Interval window()`.
template <class R>
concept CylinderRegion = requires(const R& r, double x) {
  { r.contains(x, x) } -> std::convertible_to<bool>;
  { r.window() } -> std::convertible_to<Interval>;
};

namespace detail {
void check_region_inside(Interval window, const GridSpec& grid);
}

/// f . Z restricted to a region: sum over cells whose midpoint lies in the region of f(midpoint) Z(cell).
/// Poisson realizations are clipped exactly by point membership instead.
template <CylinderRegion Region, class F>
double integrate(F&& f, const Region& region, const BasisRealization& z) {
  const GridSpec& grid = z.grid();
  const Interval window = region.window();
  detail::check_region_inside(window, grid);
  const int r0 = grid.row_of(std::max(window.lo, grid.t_min()));
  const int r1 = grid.row_of(std::min(window.hi, grid.t_max()));
  double sum = 0.0;
  if (z.kind() == BasisKind::Poisson) {
    for (int row = r0; row <= r1; ++row)
      for (const PoissonPoint& p : z.points_in_row(row))
        if (region.contains(p.theta, p.s)) sum += f(p.theta, p.s);
    return sum;
  }
  const auto& inc = z.increments();
  for (int row = r0; row <= r1; ++row) {
    const double s = grid.row_mid(row);
    for (int col = 0; col < grid.n_angles(); ++col) {
      const double theta = grid.angle_mid(col);
      if (region.contains(theta, s)) sum += f(theta, s) * inc(row, col);
    }
  }
  return sum;
}

}  // namespace lgm
