#include "lgm/levy_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "lgm/random.hpp"

namespace lgm {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

const GaussLegendre& gauss_legendre_24() {
  static const GaussLegendre rule(24);
  return rule;
}

// --- spot laws --------------------------------------------------------------

BasisKind kind_of(const SpotLaw& spot) { return static_cast<BasisKind>(spot.index()); }

const char* to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::Gaussian: return "gaussian";
    case BasisKind::Poisson: return "poisson";
    case BasisKind::Gamma: return "gamma";
    case BasisKind::InverseGaussian: return "inverse_gaussian";
  }
  return "?";
}

void validate(const SpotLaw& spot) {
  std::visit(Overloaded{
                 [](const GaussianSpot& s) {
                   if (!(s.variance >= 0.0) || !std::isfinite(s.drift))
                     throw InvalidArgument("gaussian spot needs finite drift and variance >= 0");
                 },
                 [](const PoissonSpot&) {},
                 [](const GammaSpot& s) {
                   if (!(s.shape > 0.0 && s.rate > 0.0)) throw InvalidArgument("gamma spot needs shape > 0, rate > 0");
                 },
                 [](const InverseGaussianSpot& s) {
                   if (!(s.eta > 0.0 && s.gamma > 0.0)) throw InvalidArgument("inverse gaussian spot needs eta > 0, gamma > 0");
                 }},
             spot);
}

std::complex<double> cumulant(const SpotLaw& spot, double lambda) {
  using namespace std::complex_literals;
  return std::visit(
      Overloaded{[&](const GaussianSpot& s) -> std::complex<double> {
                   return 1i * lambda * s.drift - 0.5 * lambda * lambda * s.variance;
                 },
                 [&](const PoissonSpot&) -> std::complex<double> { return std::exp(1i * lambda) - 1.0; },
                 [&](const GammaSpot& s) -> std::complex<double> {
                   return -s.shape * std::log(1.0 - 1i * lambda / s.rate);
                 },
                 [&](const InverseGaussianSpot& s) -> std::complex<double> {
                   return s.eta * s.gamma * (1.0 - std::sqrt(1.0 - 2.0i * lambda / (s.gamma * s.gamma)));
                 }},
      spot);
}

double kumulant_bound(const SpotLaw& spot) {
  return std::visit(Overloaded{[](const GaussianSpot&) { return kInf; }, [](const PoissonSpot&) { return kInf; },
                               [](const GammaSpot& s) { return s.rate; },
                               [](const InverseGaussianSpot& s) { return 0.5 * s.gamma * s.gamma; }},
                    spot);
}

double kumulant(const SpotLaw& spot, double theta) {
  if (!(theta < kumulant_bound(spot)))
    throw KumulantDomainError("kumulant of " + std::string(to_string(kind_of(spot))) + " spot diverges at theta=" +
                              std::to_string(theta));
  return std::visit(Overloaded{[&](const GaussianSpot& s) { return theta * s.drift + 0.5 * theta * theta * s.variance; },
                               [&](const PoissonSpot&) { return std::expm1(theta); },
                               [&](const GammaSpot& s) { return -s.shape * std::log1p(-theta / s.rate); },
                               [&](const InverseGaussianSpot& s) {
                                 return s.eta * s.gamma * (1.0 - std::sqrt(1.0 - 2.0 * theta / (s.gamma * s.gamma)));
                               }},
                    spot);
}

double spot_mean(const SpotLaw& spot) {
  return std::visit(Overloaded{[](const GaussianSpot& s) { return s.drift; }, [](const PoissonSpot&) { return 1.0; },
                               [](const GammaSpot& s) { return s.shape / s.rate; },
                               [](const InverseGaussianSpot& s) { return s.eta / s.gamma; }},
                    spot);
}

double spot_variance(const SpotLaw& spot) {
  return std::visit(Overloaded{[](const GaussianSpot& s) { return s.variance; }, [](const PoissonSpot&) { return 1.0; },
                               [](const GammaSpot& s) { return s.shape / (s.rate * s.rate); },
                               [](const InverseGaussianSpot& s) { return s.eta / (s.gamma * s.gamma * s.gamma); }},
                    spot);
}

// --- control measure ----------------------------------------------------------

ControlMeasure::ControlMeasure(Density density) : density_(std::move(density)) {
  std::visit(Overloaded{[](const Constant& d) {
                          if (!(d.c >= 0.0)) throw InvalidArgument("control density: constant must be >= 0");
                        },
                        [](const Linear& d) {
                          if (!(d.a >= 0.0)) throw InvalidArgument("control density: a*s needs a >= 0");
                        },
                        [](const Exponential& d) {
                          if (!(d.a >= 0.0) || !std::isfinite(d.b))
                            throw InvalidArgument("control density: a*exp(-b s) needs a >= 0");
                        },
                        [](const Power& d) {
                          if (!(d.a >= 0.0 && d.alpha > -1.0))
                            throw InvalidArgument("control density: a*s^alpha needs a >= 0, alpha > -1");
                        },
                        [](const Tabulated& d) {
                          if (d.knots.size() < 2 || d.knots.size() != d.values.size())
                            throw InvalidArgument("control density: table needs >= 2 matching knots and values");
                          for (std::size_t i = 0; i < d.knots.size(); ++i) {
                            if (d.values[i] < 0.0) throw InvalidArgument("control density: negative tabulated value");
                            if (i > 0 && !(d.knots[i] > d.knots[i - 1]))
                              throw InvalidArgument("control density: knots must increase");
                          }
                        }},
             density_);
}

ControlMeasure ControlMeasure::tabulated(std::vector<double> knots, std::vector<double> values) {
  return ControlMeasure(Tabulated{std::move(knots), std::move(values)});
}

namespace {

double table_value(const ControlMeasure::Tabulated& t, double s) {
  if (s < t.knots.front() || s > t.knots.back()) return 0.0;
  const auto it = std::upper_bound(t.knots.begin(), t.knots.end(), s);
  if (it == t.knots.end()) return t.values.back();
  const std::size_t i = static_cast<std::size_t>(it - t.knots.begin()) - 1;
  const double w = (s - t.knots[i]) / (t.knots[i + 1] - t.knots[i]);
  return (1.0 - w) * t.values[i] + w * t.values[i + 1];
}

double table_cumulative(const ControlMeasure::Tabulated& t, double s) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < t.knots.size(); ++i) {
    const double lo = std::max(t.knots[i], 0.0);
    const double hi = std::min(t.knots[i + 1], s);
    if (hi <= lo) continue;
    total += 0.5 * (hi - lo) * (table_value(t, lo) + table_value(t, hi));
  }
  return total;
}

}  // namespace

double ControlMeasure::g(double s) const {
  if (s < 0.0) return 0.0;
  return std::visit(Overloaded{[&](const Constant& d) { return d.c; }, [&](const Linear& d) { return d.a * s; },
                               [&](const Exponential& d) { return d.a * std::exp(-d.b * s); },
                               [&](const Power& d) { return d.a * std::pow(s, d.alpha); },
                               [&](const Tabulated& d) { return table_value(d, s); }},
                    density_);
}

double ControlMeasure::cumulative(double s) const {
  if (s <= 0.0) return 0.0;
  if (std::isinf(s)) {
    throw UnboundedRegion("control measure of an unbounded time range");
  }
  return std::visit(Overloaded{[&](const Constant& d) { return d.c * s; }, [&](const Linear& d) { return 0.5 * d.a * s * s; },
                               [&](const Exponential& d) {
                                 return d.b == 0.0 ? d.a * s : d.a * -std::expm1(-d.b * s) / d.b;
                               },
                               [&](const Power& d) { return d.a * std::pow(s, d.alpha + 1.0) / (d.alpha + 1.0); },
                               [&](const Tabulated& d) { return table_cumulative(d, s); }},
                    density_);
}

double ControlMeasure::integral(double lo, double hi) const {
  if (!(hi > lo)) return 0.0;
  return cumulative(hi) - cumulative(lo);
}

double ControlMeasure::max_on(double lo, double hi) const {
  double m = std::max(g(lo), g(hi));
  if (const auto* t = std::get_if<Tabulated>(&density_)) {
    for (std::size_t i = 0; i < t->knots.size(); ++i)
      if (t->knots[i] > lo && t->knots[i] < hi) m = std::max(m, t->values[i]);
  }
  if (const auto* p = std::get_if<Power>(&density_); p && p->alpha < 0.0 && lo <= 0.0) {
    // s^alpha is unbounded at 0; cap the envelope just above the singularity
    m = std::max(m, g(std::max(lo, 1e-12 * (hi - lo))));
  }
  return m;
}

// --- grid -------------------------------------------------------------------------

GridSpec::GridSpec(int n_angles, double dt, double t_min, double t_max)
    : n_angles_(n_angles), n_rows_(0), dt_(dt), t_min_(t_min), t_max_(t_max) {
  if (n_angles < 1) throw InvalidArgument("grid needs at least one angle");
  if (!(dt > 0.0)) throw InvalidArgument("grid needs dt > 0");
  if (!(t_max > t_min)) throw InvalidArgument("grid needs t_max > t_min");
  const double rows = (t_max - t_min) / dt;
  const double rounded = std::round(rows);
  if (std::abs(rows - rounded) > 1e-9 * std::max(1.0, rows))
    throw InvalidArgument("grid: dt must divide the time window");
  n_rows_ = static_cast<int>(rounded);
}

GridSpec GridSpec::from_dphi(double dphi, double dt, double t_min, double t_max) {
  if (!(dphi > 0.0)) throw InvalidArgument("grid needs dphi > 0");
  const double n = kTwoPi / dphi;
  const double rounded = std::round(n);
  if (std::abs(n - rounded) > 1e-9 * n) throw InvalidArgument("grid: 2*pi/dphi must be an integer");
  return GridSpec(static_cast<int>(rounded), dt, t_min, t_max);
}

int GridSpec::col_of(double theta) const {
  const int col = static_cast<int>(std::floor((wrap_angle(theta) + kPi) / dphi()));
  return std::clamp(col, 0, n_angles_ - 1);
}

int GridSpec::row_of(double s) const {
  const int row = static_cast<int>(std::floor((s - t_min_) / dt_));
  return std::clamp(row, 0, n_rows_ - 1);
}

GridSpec GridSpec::refined(int factor) const {
  if (factor < 1) throw InvalidArgument("refinement factor must be >= 1");
  return GridSpec(n_angles_ * factor, dt_ / factor, t_min_, t_max_);
}

double cell_measure(const GridSpec& grid, const ControlMeasure& control, int row) {
  return grid.dphi() * control.integral(grid.row_lo(row), grid.row_hi(row));
}

// --- realizations -------------------------------------------------------------------

BasisRealization::BasisRealization(GridSpec grid, BasisKind kind, std::uint64_t seed, Eigen::MatrixXd increments,
                                   std::vector<PoissonPoint> points, std::vector<int> row_offsets)
    : grid_(grid),
      kind_(kind),
      seed_(seed),
      increments_(std::move(increments)),
      points_(std::move(points)),
      row_offsets_(std::move(row_offsets)) {}

std::span<const PoissonPoint> BasisRealization::points_in_row(int row) const {
  if (row_offsets_.empty()) return {};
  const auto b = static_cast<std::size_t>(row_offsets_[row]);
  const auto e = static_cast<std::size_t>(row_offsets_[row + 1]);
  return std::span<const PoissonPoint>(points_).subspan(b, e - b);
}

namespace {

/// Draw of Z(cell) given the cell's spot law and control mass.
struct CellSampler {
  Engine& engine;
  double mass;

  double operator()(const GaussianSpot& s) const {
    if (mass <= 0.0 || s.variance == 0.0) return s.drift * mass;
    std::normal_distribution<double> d(s.drift * mass, std::sqrt(s.variance * mass));
    return d(engine);
  }
  double operator()(const PoissonSpot&) const {
    if (mass <= 0.0) return 0.0;
    std::poisson_distribution<long> d(mass);
    return static_cast<double>(d(engine));
  }
  double operator()(const GammaSpot& s) const {
    if (mass <= 0.0) return 0.0;
    std::gamma_distribution<double> d(s.shape * mass, 1.0 / s.rate);
    return d(engine);
  }
  double operator()(const InverseGaussianSpot& s) const {
    if (mass <= 0.0) return 0.0;
    InverseGaussianSampler d(s.eta * mass, s.gamma);
    return d(engine);
  }
};

}  // namespace

BasisRealization sample_realization(const BasisSpec& spec, const GridSpec& grid, std::uint64_t seed) {
  validate(spec.spot);
  const BasisKind kind = spec.kind();
  Engine engine = make_engine(seed);
  Eigen::MatrixXd inc(grid.n_rows(), grid.n_angles());
  std::vector<PoissonPoint> points;
  std::vector<int> offsets;
  if (kind == BasisKind::Poisson) offsets.reserve(static_cast<std::size_t>(grid.n_rows()) + 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (int row = 0; row < grid.n_rows(); ++row) {
    const double mass = cell_measure(grid, spec.control, row);
    const double s_lo = grid.row_lo(row);
    const double s_hi = grid.row_hi(row);
    const double envelope = spec.control.max_on(s_lo, s_hi);
    if (kind == BasisKind::Poisson) offsets.push_back(static_cast<int>(points.size()));
    for (int col = 0; col < grid.n_angles(); ++col) {
      const SpotLaw spot = spec.spot_at(grid.angle_mid(col), grid.row_mid(row));
      if (spec.cell_spot) {
        if (kind_of(spot) != kind) throw InvalidArgument("cell spot field changed the basis kind");
        validate(spot);
      }
      const double z = std::visit(CellSampler{engine, mass}, spot);
      inc(row, col) = z;
      if (kind == BasisKind::Poisson) {
        const auto count = static_cast<long>(z);
        for (long k = 0; k < count; ++k) {
          const double theta = grid.angle_lo(col) + unit(engine) * grid.dphi();
          double s = s_lo;
          for (;;) {
            s = s_lo + unit(engine) * (s_hi - s_lo);
            if (unit(engine) * envelope <= spec.control.g(s)) break;
          }
          points.push_back({theta, s});
        }
      }
    }
  }
  if (kind == BasisKind::Poisson) offsets.push_back(static_cast<int>(points.size()));
  return BasisRealization(grid, kind, seed, std::move(inc), std::move(points), std::move(offsets));
}

void write_realization_csv(std::ostream& os, const BasisRealization& z) {
  const GridSpec& grid = z.grid();
  os.precision(17);
  os << "theta_lo,theta_hi,t_lo,t_hi,increment\n";
  for (int row = 0; row < grid.n_rows(); ++row)
    for (int col = 0; col < grid.n_angles(); ++col)
      os << grid.angle_lo(col) << ',' << grid.angle_lo(col) + grid.dphi() << ',' << grid.row_lo(row) << ','
         << grid.row_hi(row) << ',' << z.increments()(row, col) << '\n';
}

// --- regions --------------------------------------------------------------------------

double wrap_angle(double phi) {
  double w = std::fmod(phi + kPi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  w -= kPi;
  return w >= kPi ? -kPi : w;
}

double cyclic_distance(double a, double b) {
  const double d = std::abs(wrap_angle(a - b));
  return std::min(d, kTwoPi - d);
}

RectRegion::RectRegion(std::vector<CellRect> rects) : rects_(std::move(rects)) {
  for (const CellRect& r : rects_) {
    if (!(r.theta_hi >= r.theta_lo && r.s_hi >= r.s_lo))
      throw InvalidArgument("rectangle bounds must be ordered");
    if (std::isinf(r.s_lo) || std::isinf(r.s_hi) || std::isinf(r.theta_lo) || std::isinf(r.theta_hi))
      throw UnboundedRegion("rectangle with an infinite side");
    if (r.theta_lo < -kPi - 1e-12 || r.theta_hi > kPi + 1e-12)
      throw InvalidArgument("rectangle angles must lie in [-pi, pi]");
  }
}

bool RectRegion::contains(double theta, double s) const {
  for (const CellRect& r : rects_)
    if (theta >= r.theta_lo && theta < r.theta_hi && s >= r.s_lo && s < r.s_hi) return true;
  return false;
}

Interval RectRegion::window() const {
  if (rects_.empty()) return {};
  Interval w{rects_.front().s_lo, rects_.front().s_hi};
  for (const CellRect& r : rects_) {
    w.lo = std::min(w.lo, r.s_lo);
    w.hi = std::max(w.hi, r.s_hi);
  }
  return w;
}

double measure_of(const RectRegion& region, const ControlMeasure& control) {
  double total = 0.0;
  for (const CellRect& r : region.rects()) total += (r.theta_hi - r.theta_lo) * control.integral(r.s_lo, r.s_hi);
  return total;
}

namespace detail {

void check_region_inside(Interval window, const GridSpec& grid) {
  if (window.empty()) return;
  if (std::isinf(window.lo) || std::isinf(window.hi)) throw UnboundedRegion("region has an unbounded time extent");
  // g vanishes for s < 0, so only the part with s >= 0 has to be covered by the grid
  const double lo = std::max(window.lo, 0.0);
  const double hi = window.hi;
  if (hi < lo) return;
  const double tol = 1e-9 * std::max(1.0, std::abs(grid.t_max()));
  if (lo < grid.t_min() - tol || hi > grid.t_max() + tol)
    throw RegionOutsideGrid("region time range [" + std::to_string(lo) + ", " + std::to_string(hi) +
                            "] is not inside the grid window");
}

}  // namespace detail

}  // namespace lgm
