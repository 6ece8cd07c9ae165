#include "lgm/growth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <unsupported/Eigen/FFT>

#include "lgm/io.hpp"

namespace lgm {

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::RateLinear: return "rate-linear";
    case ModelKind::DirectRadial: return "direct";
    case ModelKind::DirectScaled: return "direct-scaled";
    case ModelKind::RateOfLog: return "rate-of-log";
    case ModelKind::ExponentialTumour: return "exponential-tumour";
  }
  return "?";
}

double deterministic_part(const GrowthModelSpec& spec, double t, double phi) {
  return spec.uses_time_union() ? spec.drift.integral(t, phi) : spec.drift(t, phi);
}

double apply_link(const GrowthModelSpec& spec, double phi, double linear) {
  switch (spec.kind) {
    case ModelKind::RateLinear: return (spec.r0 ? spec.r0(phi) : 0.0) + linear;
    case ModelKind::DirectRadial: return linear;
    case ModelKind::DirectScaled: return (spec.multiplier ? spec.multiplier(phi) : 1.0) * linear;
    case ModelKind::RateOfLog: return (spec.r0 ? spec.r0(phi) : 1.0) * std::exp(linear);
    case ModelKind::ExponentialTumour: return std::exp(linear);
  }
  return linear;
}

// --- kernels ---------------------------------------------------------------------------------------

StochasticKernel::StochasticKernel(const GrowthModelSpec& spec, double t)
    : spec_(std::make_shared<const GrowthModelSpec>(spec)), t_(t) {
  if (spec.uses_time_union()) {
    const WeightFunction weight = spec.weight;
    union_ = std::make_shared<const TimeUnion>(
        spec.ambit, [weight](double sp, double delta, double s) { return weight(sp, delta, s); }, t,
        weight.constant_value(), spec.use_shortcut);
  }
}

bool StochasticKernel::contains(double delta, double s) const {
  if (s < 0.0 || s > t_) return false;
  if (union_) return union_->contains_offset(delta, s);
  return lgm::contains(spec_->ambit, t_, 0.0, delta, s);
}

double StochasticKernel::operator()(double delta, double s) const {
  if (s < 0.0 || s > t_) return 0.0;
  if (union_) return union_->weight(delta, s);
  if (!lgm::contains(spec_->ambit, t_, 0.0, delta, s)) return 0.0;
  return spec_->weight(t_, delta, s);
}

double StochasticKernel::half_width(double s) const {
  if (s < 0.0 || s > t_) return -1.0;
  return union_ ? union_->half_width(s) : lgm::half_width(spec_->ambit, t_, s);
}

Interval StochasticKernel::window() const {
  const Interval w = union_ ? union_->window() : lgm::window(spec_->ambit, t_);
  return {std::max(w.lo, 0.0), w.hi};
}

Eigen::MatrixXd StochasticKernel::on_grid(const GridSpec& grid) const {
  const int n = grid.n_angles();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(grid.n_rows(), n);
  const Interval w = window();
  for (int row = 0; row < grid.n_rows(); ++row) {
    const double s = grid.row_mid(row);
    if (!w.contains(s)) continue;
    for (int m = 0; m <= n / 2; ++m) {
      const double delta = std::min(m, n - m) * grid.dphi();
      const double v = contains(delta, s) ? (*this)(delta, s) : 0.0;
      k(row, m) = v;
      k(row, (n - m) % n) = v;
    }
  }
  return k;
}

// --- simulator -------------------------------------------------------------------------------------

namespace {

using ComplexVec = std::vector<std::complex<double>>;

void check_exponential_domain(const GrowthModelSpec& spec, const GridSpec& grid, const Eigen::MatrixXd& k) {
  for (int row = 0; row < k.rows(); ++row) {
    const double w_max = k.row(row).maxCoeff();
    if (!(w_max > 0.0)) continue;
    double bound = std::numeric_limits<double>::infinity();
    if (spec.basis.factorizable()) {
      bound = kumulant_bound(spec.basis.spot);
    } else {
      for (int col = 0; col < grid.n_angles(); ++col)
        bound = std::min(bound, kumulant_bound(spec.basis.spot_at(grid.angle_mid(col), grid.row_mid(row))));
    }
    if (w_max >= bound)
      throw KumulantDomainError("exponential model: weight " + format_double(w_max) + " at s = " +
                                format_double(grid.row_mid(row)) + " reaches the kumulant bound " +
                                format_double(bound));
  }
}

}  // namespace

GrowthSimulator::GrowthSimulator(GrowthModelSpec spec, GridSpec grid, std::vector<double> times)
    : spec_(std::move(spec)), grid_(grid), times_(std::move(times)) {
  validate(spec_.basis.spot);
  kernels_.reserve(times_.size());
  for (double t : times_) {
    if (!(t >= grid_.t_min() && t <= grid_.t_max()))
      throw RegionOutsideGrid("time " + format_double(t) + " lies outside the grid window");
    kernels_.emplace_back(spec_, t);
  }
  Eigen::FFT<double> fft;
  const int n = grid_.n_angles();
  row_lo_ = grid_.n_rows();
  row_hi_ = -1;
  for (const StochasticKernel& kernel : kernels_) {
    const Interval w = kernel.window();
    detail::check_region_inside(w, grid_);
    const Eigen::MatrixXd k = kernel.on_grid(grid_);
    if (spec_.is_exponential()) check_exponential_domain(spec_, grid_, k);
    int r0 = grid_.n_rows();
    int r1 = -1;
    for (int row = 0; row < k.rows(); ++row)
      if (k.row(row).cwiseAbs().maxCoeff() > 0.0) {
        r0 = std::min(r0, row);
        r1 = std::max(r1, row);
      }
    if (r1 < r0) r0 = r1 = 0;
    row0_.push_back(r0);
    Eigen::MatrixXd spectra(r1 - r0 + 1, n);
    std::vector<double> in(n);
    ComplexVec out;
    for (int row = r0; row <= r1; ++row) {
      for (int c = 0; c < n; ++c) in[c] = k(row, c);
      fft.fwd(out, in);
      for (int c = 0; c < n; ++c) spectra(row - r0, c) = out[c].real();  // symmetric kernel: real spectrum
    }
    kernel_spectra_.push_back(std::move(spectra));
    row_lo_ = std::min(row_lo_, r0);
    row_hi_ = std::max(row_hi_, r1);
  }
}

Eigen::MatrixXd GrowthSimulator::stochastic_terms(const BasisRealization& z) const {
  if (!(z.grid() == grid_)) throw InvalidArgument("realization grid differs from the simulator grid");
  const int n = grid_.n_angles();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(times_.size()), n);
  if (z.kind() == BasisKind::Poisson) {
    const double dphi = grid_.dphi();
    for (std::size_t i = 0; i < times_.size(); ++i) {
      const StochasticKernel& kernel = kernels_[i];
      const Interval w = kernel.window();
      const int r0 = grid_.row_of(std::max(w.lo, grid_.t_min()));
      const int r1 = grid_.row_of(std::min(w.hi, grid_.t_max()));
      for (int row = r0; row <= r1; ++row) {
        for (const PoissonPoint& p : z.points_in_row(row)) {
          const double hw = kernel.half_width(p.s);
          if (hw < 0.0) continue;
          int c_lo = 0;
          int c_hi = n - 1;
          if (hw < kPi - dphi) {
            c_lo = static_cast<int>(std::floor((p.theta - hw + kPi) / dphi - 0.5)) - 1;
            c_hi = static_cast<int>(std::ceil((p.theta + hw + kPi) / dphi - 0.5)) + 1;
          }
          for (int cc = c_lo; cc <= c_hi; ++cc) {
            const int j = ((cc % n) + n) % n;
            const double delta = cyclic_distance(p.theta, grid_.angle_mid(j));
            if (kernel.contains(delta, p.s)) out(static_cast<Eigen::Index>(i), j) += kernel(delta, p.s);
          }
        }
      }
    }
    return out;
  }
  if (row_hi_ < row_lo_) return out;
  Eigen::FFT<double> fft;
  std::vector<ComplexVec> z_hat(static_cast<std::size_t>(row_hi_ - row_lo_ + 1));
  std::vector<double> in(n);
  for (int row = row_lo_; row <= row_hi_; ++row) {
    for (int c = 0; c < n; ++c) in[c] = z.increments()(row, c);
    fft.fwd(z_hat[static_cast<std::size_t>(row - row_lo_)], in);
  }
  ComplexVec acc(n);
  ComplexVec x;
  for (std::size_t i = 0; i < times_.size(); ++i) {
    std::fill(acc.begin(), acc.end(), std::complex<double>(0.0, 0.0));
    const Eigen::MatrixXd& spectra = kernel_spectra_[i];
    for (Eigen::Index r = 0; r < spectra.rows(); ++r) {
      const ComplexVec& zr = z_hat[static_cast<std::size_t>(row0_[i] + r - row_lo_)];
      for (int c = 0; c < n; ++c) acc[c] += spectra(r, c) * zr[c];
    }
    fft.inv(x, acc);
    for (int c = 0; c < n; ++c) out(static_cast<Eigen::Index>(i), c) = x[c].real();
  }
  return out;
}

GrowthHistory GrowthSimulator::from_terms(const Eigen::MatrixXd& terms, std::uint64_t seed) const {
  GrowthHistory h;
  h.times = times_;
  h.n_angles = grid_.n_angles();
  h.dt = grid_.dt();
  h.t_min = grid_.t_min();
  h.t_max = grid_.t_max();
  h.seed = seed;
  h.spec_hash = spec_.tag;
  h.radii.resize(terms.rows(), terms.cols());
  for (Eigen::Index i = 0; i < terms.rows(); ++i) {
    for (Eigen::Index j = 0; j < terms.cols(); ++j) {
      const double phi = grid_.angle_mid(static_cast<int>(j));
      const double r = apply_link(spec_, phi, deterministic_part(spec_, times_[i], phi) + terms(i, j));
      if (!std::isfinite(r))
        throw NonFiniteValue("non-finite radius at t = " + format_double(times_[i]) + ", phi = " + format_double(phi));
      if (r <= 0.0) h.has_nonpositive_radius = true;
      h.radii(i, j) = r;
    }
  }
  return h;
}

GrowthHistory GrowthSimulator::simulate(std::uint64_t seed) const {
  return from_terms(stochastic_terms(realize(seed)), seed);
}

GrowthHistory simulate(const GrowthModelSpec& spec, const GridSpec& grid, std::uint64_t seed,
                       const std::vector<double>& times) {
  return GrowthSimulator(spec, grid, times).simulate(seed);
}

// --- Poisson view ---------------------------------------------------------------------------------

OutburstView poisson_outburst_view(const GrowthModelSpec& spec, const GridSpec& grid, std::uint64_t seed, double t) {
  if (spec.basis.kind() != BasisKind::Poisson)
    throw WrongBasisKind("the outburst view needs a Poisson basis, got " + std::string(to_string(spec.basis.kind())));
  GrowthModelSpec direct = spec;
  direct.kind = ModelKind::DirectRadial;
  const StochasticKernel rate(direct, t);
  const BasisRealization z = sample_realization(spec.basis, grid, seed);

  // Radii at every row boundary up to t, for embedding the outburst locations.
  std::vector<double> times;
  for (int row = 0; row < grid.n_rows() && grid.row_lo(row) <= t; ++row) times.push_back(grid.row_lo(row));
  if (times.empty() || times.back() < t) times.push_back(t);
  const GrowthSimulator sim(spec, grid, times);
  const GrowthHistory history = sim.from_terms(sim.stochastic_terms(z), seed);

  OutburstView view;
  for (const PoissonPoint& p : z.points())
    if (p.s <= t) {
      view.support.push_back(p);
      view.points.push_back(embed(history, p.theta, p.s));
    }
  const int n = grid.n_angles();
  view.rate_terms = Eigen::VectorXd::Zero(n);
  view.rate_terms_integrated = Eigen::VectorXd::Zero(n);
  const Interval w = rate.window();
  for (int j = 0; j < n; ++j) {
    const double phi = grid.angle_mid(j);
    double sum = 0.0;
    for (const PoissonPoint& p : z.points()) {
      if (!w.contains(p.s)) continue;
      const double delta = cyclic_distance(p.theta, phi);
      if (rate.contains(delta, p.s)) sum += rate(delta, p.s);
    }
    view.rate_terms[j] = sum;
    view.rate_terms_integrated[j] = integrate([&](double theta, double s) { return rate(cyclic_distance(theta, phi), s); },
                                              KernelRegion{&rate, phi}, z);
  }
  return view;
}

// --- moment matching -------------------------------------------------------------------------------

GammaMatch moment_match_gamma(double mu_t, double sigma2, double beta, double m) {
  if (!(sigma2 > 0.0) || !(beta > 0.0) || !(m > 0.0))
    throw InvalidArgument("gamma matching needs sigma2, beta, m > 0");
  return {mu_t - std::sqrt(sigma2) * std::sqrt(beta) * m, std::sqrt(beta / sigma2)};
}

InverseGaussianMatch moment_match_ig(double mean_z, double var_z, double m) {
  if (!(mean_z > 0.0) || !(var_z > 0.0) || !(m > 0.0))
    throw InvalidArgument("inverse Gaussian matching needs mean, variance, m > 0");
  const double gamma = std::sqrt(mean_z / var_z);
  return {mean_z * gamma / m, gamma};
}

double mesh_measure(const AmbitFamily& family, double t, const ControlMeasure& control, const GridSpec& grid) {
  const Interval w = window(family, t);
  double total = 0.0;
  for (int row = 0; row < grid.n_rows(); ++row) {
    const double s = grid.row_mid(row);
    if (!w.contains(s)) continue;
    const double hw = half_width(family, t, s);
    const int n = grid.n_angles();
    int cols = 0;
    for (int m = 0; m < n; ++m)
      if (std::min(m, n - m) * grid.dphi() <= hw) ++cols;
    total += cols * cell_measure(grid, control, row);
  }
  return total;
}

namespace {

double gaussian_sigma(const GrowthModelSpec& g) {
  const auto* spot = std::get_if<GaussianSpot>(&g.basis.spot);
  if (!spot || !g.basis.factorizable() || spot->drift != 0.0)
    throw AssumptionViolation("moment matching starts from a factorizable zero-drift Gaussian basis");
  if (g.weight.constant_value() != std::optional<double>(1.0) || g.uses_time_union())
    throw AssumptionViolation("moment matching needs a direct model with f = 1");
  return std::sqrt(spot->variance);
}

GrowthModelSpec shifted(const GrowthModelSpec& g, SpotLaw spot, const std::function<double(double)>& mean_z,
                        const std::vector<double>& times) {
  if (times.empty()) throw InvalidArgument("moment matching needs at least one time");
  GrowthModelSpec out = g;
  out.basis.spot = spot;
  std::vector<double> ts = times;
  std::sort(ts.begin(), ts.end());
  std::vector<double> values;
  for (double t : ts) values.push_back(g.drift(t, 0.0) - mean_z(t));
  out.drift = DriftFunction::table(ts, values);
  return out;
}

}  // namespace

GrowthModelSpec gamma_matched(const GrowthModelSpec& gaussian, double beta, const std::function<double(double)>& measure,
                              const std::vector<double>& times) {
  const double sigma = gaussian_sigma(gaussian);
  const GammaMatch match = moment_match_gamma(0.0, sigma * sigma, beta, 1.0);
  return shifted(gaussian, GammaSpot{beta, match.rate},
                 [&](double t) { return sigma * std::sqrt(beta) * measure(t); }, times);
}

GrowthModelSpec ig_matched(const GrowthModelSpec& gaussian, double beta, const std::function<double(double)>& measure,
                           const std::vector<double>& times) {
  const double sigma = gaussian_sigma(gaussian);
  const InverseGaussianMatch match = moment_match_ig(sigma * std::sqrt(beta), sigma * sigma, 1.0);
  return shifted(gaussian, InverseGaussianSpot{match.eta, match.gamma},
                 [&](double t) { return sigma * std::sqrt(beta) * measure(t); }, times);
}

// --- presets ---------------------------------------------------------------------------------------

namespace {

GrowthModelSpec ex4_spec() {
  GrowthModelSpec s;
  s.kind = ModelKind::DirectRadial;
  s.drift = DriftFunction::table({20.0, 45.0, 80.0}, {16.0, 24.0, 32.0});
  s.weight = ConstantWeight{1.0};
  s.basis.spot = GaussianSpot{0.0, 1.0};
  s.basis.control = ControlMeasure::lebesgue();
  s.ambit = Rectangular{TimeFunction::constant(kPi / 5.0), TimeFunction::proportional(0.2)};
  s.tag = "ex4";
  return s;
}

}  // namespace

GrowthModelSpec example_preset(const std::string& id) {
  if (id == "ex3") {
    GrowthModelSpec s;
    s.kind = ModelKind::RateLinear;
    s.drift = ConstantDrift{0.0};
    s.weight = ConstantWeight{1.0};
    s.basis.spot = PoissonSpot{};
    s.basis.control = ControlMeasure::linear(10.0);
    s.ambit = WedgeOverS{0.5, 1.0};
    s.tag = "ex3";
    return s;
  }
  if (id == "ex4") return ex4_spec();
  if (id == "ex5") {
    GrowthModelSpec g = ex4_spec();
    const AmbitFamily ambit = g.ambit;
    const ControlMeasure control = g.basis.control;
    GrowthModelSpec s = gamma_matched(g, 1.0, [&](double t) { return measure(ambit, t, control); },
                                      preset_times("ex4"));
    s.tag = "ex5";
    return s;
  }
  if (id == "ex6") {
    GrowthModelSpec s = ex4_spec();
    s.kind = ModelKind::DirectScaled;
    // 0.35 exp(|phi - pi| / pi) with phi read in [0, 2 pi).
    s.multiplier = [](double phi) { return 0.35 * std::exp((kPi - std::abs(wrap_angle(phi))) / kPi); };
    s.tag = "ex6";
    return s;
  }
  if (id == "tumour") {
    const TumourTable table({{21.0, 21.0, 19.0, 0.04, -0.033, 0.19},
                             {25.0, 25.0, 17.0, 0.02, -0.033, 0.19},
                             {55.0, 18.0, 4.0, 0.01, -0.067, 0.23}});
    GrowthModelSpec s;
    s.kind = ModelKind::ExponentialTumour;
    s.drift = ConstantDrift{0.0};
    s.weight = TumourWeight{table};
    s.basis.spot = GaussianSpot{0.0, 1.0};
    s.basis.control = ControlMeasure::lebesgue();
    s.ambit = TumourSet{table};
    s.tag = "tumour";
    return s;
  }
  throw UnknownId("unknown preset '" + id + "' (expected ex3, ex4, ex5, ex6 or tumour)");
}

GridSpec preset_grid(const std::string& id) {
  if (id == "ex3") return GridSpec(1000, 1.0, 0.0, 125.0);
  if (id == "ex4" || id == "ex5" || id == "ex6") return GridSpec(1000, 1.0, 0.0, 80.0);
  if (id == "tumour") return GridSpec(1000, 1.0, 0.0, 55.0);
  throw UnknownId("unknown preset '" + id + "'");
}

std::vector<double> preset_times(const std::string& id) {
  if (id == "ex3") return {75.0, 100.0, 125.0};
  if (id == "ex4" || id == "ex5" || id == "ex6") return {20.0, 45.0, 80.0};
  if (id == "tumour") return {21.0, 25.0, 55.0};
  throw UnknownId("unknown preset '" + id + "'");
}

// --- export ----------------------------------------------------------------------------------------

void write_history_csv(std::ostream& os, const GrowthHistory& history) {
  os << provenance_line(history.spec_hash, history.seed) << "\n" << "t,phi,r\n";
  for (std::size_t i = 0; i < history.times.size(); ++i)
    for (int j = 0; j < history.n_angles; ++j)
      os << format_double(history.times[i]) << ',' << format_double(history.angle(j)) << ','
         << format_double(history.radii(static_cast<Eigen::Index>(i), j)) << '\n';
}

void write_polylines_csv(std::ostream& os, const GrowthHistory& history) {
  os << provenance_line(history.spec_hash, history.seed) << "\n" << "t,x,y\n";
  for (std::size_t i = 0; i < history.times.size(); ++i)
    for (int j = 0; j <= history.n_angles; ++j) {
      const int jj = j % history.n_angles;
      const double r = history.radii(static_cast<Eigen::Index>(i), jj);
      const double phi = history.angle(jj);
      os << format_double(history.times[i]) << ',' << format_double(r * std::cos(phi)) << ','
         << format_double(r * std::sin(phi)) << '\n';
    }
}

void write_embedding_csv(std::ostream& os, const Embedding& embedding) {
  os << "x,y\n";
  for (const PlanarPoint& p : embedding.boundary) os << format_double(p.x) << ',' << format_double(p.y) << '\n';
}

}  // namespace lgm
