#include "lgm/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "lgm/parallel.hpp"
#include "lgm/random.hpp"

namespace lgm {

MomentEngine::MomentEngine(GrowthModelSpec spec, GridSpec grid, MomentMode mode)
    : spec_(std::move(spec)), grid_(grid), mode_(mode) {
  validate(spec_.basis.spot);
}

const StochasticKernel& MomentEngine::kernel_at(double t) const {
  std::lock_guard lock(mutex_);
  auto it = kernels_.find(t);
  if (it == kernels_.end()) it = kernels_.emplace(t, StochasticKernel(spec_, t)).first;
  return it->second;
}

double MomentEngine::integrate_field(std::span<const EvalPoint> points, const FieldFn& fn) const {
  if (points.empty()) throw InvalidArgument("moment query needs at least one evaluation point");
  if (mode_ == MomentMode::Exact || spec_.basis.kind() == BasisKind::Poisson) return exact_integral(points, fn);
  if (mode_ == MomentMode::Fine) return mesh_integral(grid_.refined(4), points, fn);
  return mesh_integral(grid_, points, fn);
}

double MomentEngine::mesh_integral(const GridSpec& grid, std::span<const EvalPoint> points, const FieldFn& fn) const {
  const int n = grid.n_angles();
  const std::size_t np = points.size();
  std::vector<Eigen::MatrixXd> k(np);
  std::map<double, Eigen::MatrixXd> on_grid;
  for (std::size_t j = 0; j < np; ++j) {
    const StochasticKernel& kernel = kernel_at(points[j].t);
    detail::check_region_inside(kernel.window(), grid);
    const int col = grid.col_of(points[j].phi);
    const bool aligned = std::abs(wrap_angle(grid.angle_mid(col) - points[j].phi)) < 1e-12;
    k[j].resize(grid.n_rows(), n);
    if (aligned) {
      auto it = on_grid.find(points[j].t);
      if (it == on_grid.end()) it = on_grid.emplace(points[j].t, kernel.on_grid(grid)).first;
      for (int c = 0; c < n; ++c) k[j].col(c) = it->second.col(((c - col) % n + n) % n);
    } else {
      for (int row = 0; row < grid.n_rows(); ++row)
        for (int c = 0; c < n; ++c)
          k[j](row, c) = kernel(cyclic_distance(grid.angle_mid(c), points[j].phi), grid.row_mid(row));
    }
  }
  std::vector<double> vals(np);
  double total = 0.0;
  for (int row = 0; row < grid.n_rows(); ++row) {
    const double cell = cell_measure(grid, spec_.basis.control, row);
    if (cell == 0.0) continue;
    double row_sum = 0.0;
    for (int c = 0; c < n; ++c) {
      bool any = false;
      for (std::size_t j = 0; j < np; ++j) {
        vals[j] = k[j](row, c);
        any = any || vals[j] != 0.0;
      }
      if (!any) continue;
      const SpotLaw spot = spec_.basis.factorizable() ? spec_.basis.spot
                                                      : spec_.basis.spot_at(grid.angle_mid(c), grid.row_mid(row));
      row_sum += fn(spot, vals);
    }
    total += row_sum * cell;
  }
  return total;
}

double MomentEngine::exact_integral(std::span<const EvalPoint> points, const FieldFn& fn) const {
  const std::size_t np = points.size();
  std::vector<const StochasticKernel*> kernels;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::vector<double> s_breaks;
  for (const EvalPoint& p : points) {
    const StochasticKernel& kernel = kernel_at(p.t);
    kernels.push_back(&kernel);
    const Interval w = kernel.window();
    lo = std::min(lo, w.lo);
    hi = std::max(hi, w.hi);
    s_breaks.push_back(w.lo);
    s_breaks.push_back(w.hi);
    for (double b : time_breakpoints(spec_.ambit, p.t)) s_breaks.push_back(b);
  }
  lo = std::max(lo, 0.0);
  if (!(hi > lo)) return 0.0;
  std::sort(s_breaks.begin(), s_breaks.end());

  const GaussLegendre& rule = gauss_legendre_24();
  std::vector<double> vals(np);
  auto inner = [&](double s) {
    const double g = spec_.basis.control.g(s);
    if (g == 0.0) return 0.0;
    std::vector<double> breaks;
    bool any = false;
    for (std::size_t j = 0; j < np; ++j) {
      const double hw = kernels[j]->half_width(s);
      if (hw < 0.0) continue;
      any = true;
      breaks.push_back(wrap_angle(points[j].phi));
      breaks.push_back(wrap_angle(points[j].phi + kPi));
      if (hw < kPi) {
        breaks.push_back(wrap_angle(points[j].phi - hw));
        breaks.push_back(wrap_angle(points[j].phi + hw));
      }
    }
    if (!any) return 0.0;
    std::sort(breaks.begin(), breaks.end());
    breaks.push_back(breaks.front() + kTwoPi);
    auto integrand = [&](double theta) {
      bool nonzero = false;
      for (std::size_t j = 0; j < np; ++j) {
        vals[j] = (*kernels[j])(cyclic_distance(theta, points[j].phi), s);
        nonzero = nonzero || vals[j] != 0.0;
      }
      if (!nonzero) return 0.0;
      return fn(spec_.basis.spot_at(wrap_angle(theta), s), vals);
    };
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
      sum += piecewise_gauss(integrand, breaks[i], breaks[i + 1], {}, kPi / 8.0, rule);
    return g * sum;
  };
  const double scale = piecewise_gauss(inner, lo, hi, s_breaks, std::max((hi - lo) / 16.0, 1e-12));
  const double tol = 1e-10 * std::max(std::abs(scale), 1e-300);
  std::vector<double> pts{lo};
  for (double b : s_breaks)
    if (b > lo && b < hi) pts.push_back(b);
  pts.push_back(hi);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    total += adaptive_simpson(inner, pts[i], pts[i + 1], tol / static_cast<double>(pts.size()), 16, 30);
  return total;
}

double MomentEngine::mean_linear(EvalPoint p) const {
  const EvalPoint pts[] = {p};
  const double stochastic =
      integrate_field(pts, [](const SpotLaw& spot, std::span<const double> k) { return k[0] * spot_mean(spot); });
  return deterministic_part(spec_, p.t, p.phi) + stochastic;
}

double MomentEngine::var_linear(EvalPoint p) const { return cov_linear(p, p); }

double MomentEngine::cov_linear(EvalPoint p1, EvalPoint p2) const {
  const EvalPoint pts[] = {p1, p2};
  return integrate_field(pts, [](const SpotLaw& spot, std::span<const double> k) {
    return k[0] * k[1] * spot_variance(spot);
  });
}

double MomentEngine::mixed_exponential_moment(std::span<const EvalPoint> points, std::span<const double> lambda) const {
  if (lambda.size() != points.size()) throw InvalidArgument("one exponent per evaluation point");
  if (std::all_of(lambda.begin(), lambda.end(), [](double l) { return l == 0.0; })) return 1.0;
  const double log_m = integrate_field(points, [&](const SpotLaw& spot, std::span<const double> k) {
    double theta = 0.0;
    for (std::size_t j = 0; j < k.size(); ++j) theta += lambda[j] * k[j];
    return kumulant(spot, theta);
  });
  return std::exp(log_m);
}

double MomentEngine::relative_second_moment(EvalPoint p1, EvalPoint p2) const {
  const EvalPoint pts[] = {p1, p2};
  const double log_m = integrate_field(pts, [](const SpotLaw& spot, std::span<const double> k) {
    if (k[0] == 0.0 || k[1] == 0.0) return 0.0;
    return kumulant(spot, k[0] + k[1]) - kumulant(spot, k[0]) - kumulant(spot, k[1]);
  });
  return std::exp(log_m);
}

double c_bar(const SpotLaw& spot, double f) { return kumulant(spot, 2.0 * f) - 2.0 * kumulant(spot, f); }

// --- Monte Carlo ------------------------------------------------------------------------------------

Estimate jackknife(const Eigen::MatrixXd& features, const std::function<double(const Eigen::VectorXd&)>& stat) {
  const Eigen::Index n = features.rows();
  if (n < 2) throw InsufficientData("jackknife needs at least two replicates");
  const Eigen::VectorXd total = features.colwise().sum().transpose();
  const double value = stat(total / static_cast<double>(n));
  Eigen::VectorXd leave(n);
  for (Eigen::Index i = 0; i < n; ++i)
    leave[i] = stat((total - features.row(i).transpose()) / static_cast<double>(n - 1));
  const double mean = leave.mean();
  const double var = (leave.array() - mean).square().sum() * static_cast<double>(n - 1) / static_cast<double>(n);
  return {value, std::sqrt(var)};
}

const char* to_string(QueryKind kind) {
  switch (kind) {
    case QueryKind::Mean: return "mean";
    case QueryKind::Variance: return "variance";
    case QueryKind::Covariance: return "covariance";
    case QueryKind::RelativeSecondMoment: return "relative-second-moment";
    case QueryKind::MixedExponential: return "mixed-exponential";
  }
  return "?";
}

bool VerifyReport::all_pass() const {
  return std::none_of(records.begin(), records.end(), [](const VerifyRecord& r) { return r.flagged; });
}

double snap_to_grid(const GridSpec& grid, double phi) { return grid.angle_mid(grid.col_of(phi)); }

VerifyReport mc_verify(const GrowthModelSpec& spec, const GridSpec& grid, std::vector<MomentQuery> queries,
                       int replicates, std::uint64_t seed, int threads, MomentMode mode) {
  if (replicates < 2) throw InvalidArgument("mc_verify needs at least two replicates");
  std::vector<double> times;
  for (MomentQuery& q : queries) {
    const std::size_t need = q.kind == QueryKind::Mean || q.kind == QueryKind::Variance ? 1
                             : q.kind == QueryKind::MixedExponential                  ? q.points.size()
                                                                                      : 2;
    if (q.points.size() != need || q.points.empty())
      throw InvalidArgument(std::string(to_string(q.kind)) + " query has the wrong number of points");
    if (q.kind == QueryKind::MixedExponential && q.lambda.size() != q.points.size())
      throw InvalidArgument("mixed exponential query needs one exponent per point");
    for (EvalPoint& p : q.points) {
      p.phi = snap_to_grid(grid, p.phi);
      times.push_back(p.t);
    }
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  auto time_index = [&](double t) {
    return static_cast<Eigen::Index>(std::lower_bound(times.begin(), times.end(), t) - times.begin());
  };

  const GrowthSimulator sim(spec, grid, times);
  std::vector<Eigen::MatrixXd> terms(static_cast<std::size_t>(replicates));
  parallel_for(replicates, threads, [&](int r) {
    terms[static_cast<std::size_t>(r)] = sim.stochastic_terms(sim.realize(derive_seed(seed, static_cast<std::uint64_t>(r))));
  });

  const MomentEngine engine(spec, grid, mode);
  VerifyReport report{{}, replicates, seed};
  for (const MomentQuery& q : queries) {
    const std::size_t np = q.points.size();
    Eigen::MatrixXd x(replicates, static_cast<Eigen::Index>(np));
    for (int r = 0; r < replicates; ++r)
      for (std::size_t j = 0; j < np; ++j)
        x(r, static_cast<Eigen::Index>(j)) =
            terms[static_cast<std::size_t>(r)](time_index(q.points[j].t), grid.col_of(q.points[j].phi));
    double analytic = 0.0;
    Estimate est{};
    switch (q.kind) {
      case QueryKind::Mean: {
        const double d = deterministic_part(spec, q.points[0].t, q.points[0].phi);
        analytic = engine.mean_linear(q.points[0]);
        Eigen::MatrixXd f = x.array() + d;
        est = jackknife(f, [](const Eigen::VectorXd& m) { return m[0]; });
        break;
      }
      case QueryKind::Variance: {
        analytic = engine.var_linear(q.points[0]);
        Eigen::MatrixXd f(replicates, 2);
        f << x.col(0), x.col(0).array().square().matrix();
        est = jackknife(f, [](const Eigen::VectorXd& m) { return m[1] - m[0] * m[0]; });
        break;
      }
      case QueryKind::Covariance: {
        analytic = engine.cov_linear(q.points[0], q.points[1]);
        Eigen::MatrixXd f(replicates, 3);
        f << x.col(0), x.col(1), x.col(0).cwiseProduct(x.col(1));
        est = jackknife(f, [](const Eigen::VectorXd& m) { return m[2] - m[0] * m[1]; });
        break;
      }
      case QueryKind::RelativeSecondMoment: {
        analytic = engine.relative_second_moment(q.points[0], q.points[1]);
        Eigen::MatrixXd f(replicates, 3);
        f << x.col(0).array().exp().matrix(), x.col(1).array().exp().matrix(),
            (x.col(0) + x.col(1)).array().exp().matrix();
        est = jackknife(f, [](const Eigen::VectorXd& m) { return m[2] / (m[0] * m[1]); });
        break;
      }
      case QueryKind::MixedExponential: {
        analytic = engine.mixed_exponential_moment(q.points, q.lambda);
        const Eigen::Map<const Eigen::VectorXd> lam(q.lambda.data(), static_cast<Eigen::Index>(np));
        Eigen::MatrixXd f = (x * lam).array().exp().matrix();
        est = jackknife(f, [](const Eigen::VectorXd& m) { return m[0]; });
        break;
      }
    }
    const double diff = est.value - analytic;
    double z = 0.0;
    if (est.se > 0.0) z = diff / est.se;
    else if (std::abs(diff) > 1e-12 * std::max(1.0, std::abs(analytic))) z = std::copysign(std::numeric_limits<double>::infinity(), diff);
    report.records.push_back({q, analytic, est.value, est.se, z, !(std::abs(z) <= 3.0)});
  }
  return report;
}

}  // namespace lgm
