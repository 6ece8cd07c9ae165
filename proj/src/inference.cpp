#include "lgm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "lgm/error.hpp"
#include "lgm/io.hpp"

namespace lgm {

// --- datasets --------------------------------------------------------------------------------------

bool ProfileDataset::all_positive() const {
  return std::all_of(radii.begin(), radii.end(), [](const Eigen::MatrixXd& m) { return (m.array() > 0.0).all(); });
}

Eigen::MatrixXd ProfileDataset::at_time(std::size_t i) const {
  Eigen::MatrixXd out(replicates(), n_angles());
  for (int r = 0; r < replicates(); ++r) out.row(r) = radii[static_cast<std::size_t>(r)].row(static_cast<Eigen::Index>(i));
  return out;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& text, int line_no, const std::string& column) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size())
    throw MalformedFile("line " + std::to_string(line_no) + ": column '" + column + "' is not a number: '" + text + "'");
  return v;
}

}  // namespace

ProfileDataset read_profiles_csv(std::istream& is, bool require_positive) {
  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    header = split_csv(line);
    break;
  }
  if (header.empty()) throw MalformedFile("missing header row");
  int col_t = -1, col_phi = -1, col_r = -1, col_rep = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    int* slot = header[i] == "t" ? &col_t : header[i] == "phi" ? &col_phi : header[i] == "r" ? &col_r
              : header[i] == "replicate" ? &col_rep : nullptr;
    if (!slot) throw MalformedFile("line " + std::to_string(line_no) + ": unknown column '" + header[i] + "'");
    if (*slot >= 0) throw MalformedFile("line " + std::to_string(line_no) + ": duplicate column '" + header[i] + "'");
    *slot = static_cast<int>(i);
  }
  if (col_t < 0 || col_phi < 0 || col_r < 0) throw MalformedFile("header must name the columns t, phi and r");

  struct Row {
    long rep;
    double t;
    double phi;
    double r;
  };
  std::vector<Row> rows;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size())
      throw MalformedFile("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                          " fields, got " + std::to_string(cells.size()));
    Row row{0, parse_number(cells[static_cast<std::size_t>(col_t)], line_no, "t"),
            wrap_angle(parse_number(cells[static_cast<std::size_t>(col_phi)], line_no, "phi")),
            parse_number(cells[static_cast<std::size_t>(col_r)], line_no, "r")};
    if (col_rep >= 0) {
      const double rep = parse_number(cells[static_cast<std::size_t>(col_rep)], line_no, "replicate");
      if (rep != std::floor(rep)) throw MalformedFile("line " + std::to_string(line_no) + ": replicate must be an integer");
      row.rep = static_cast<long>(rep);
    }
    if (!std::isfinite(row.t) || !std::isfinite(row.phi) || !std::isfinite(row.r))
      throw MalformedFile("line " + std::to_string(line_no) + ": non-finite value");
    if (require_positive && row.r <= 0.0)
      throw NonPositiveRadius("line " + std::to_string(line_no) + ": radius " + format_double(row.r) + " <= 0");
    rows.push_back(row);
  }
  if (rows.empty()) throw MalformedFile("no data rows");

  std::vector<double> angles;
  for (const Row& r : rows) angles.push_back(r.phi);
  std::sort(angles.begin(), angles.end());
  std::vector<double> distinct;
  for (double a : angles)
    if (distinct.empty() || a - distinct.back() > 1e-9) distinct.push_back(a);
  const int n = static_cast<int>(distinct.size());
  if (n < 2) throw NonUniformGrid("need at least two distinct angles");
  const double step = kTwoPi / n;
  for (int j = 0; j < n; ++j) {
    const double gap = j + 1 < n ? distinct[static_cast<std::size_t>(j + 1)] - distinct[static_cast<std::size_t>(j)]
                                 : distinct.front() + kTwoPi - distinct.back();
    if (std::abs(gap - step) > 1e-6 * step)
      throw NonUniformGrid("angles do not form a uniform grid: gap " + format_double(gap) + " after phi = " +
                           format_double(distinct[static_cast<std::size_t>(j)]) + ", expected " + format_double(step));
  }
  auto angle_index = [&](double phi) {
    const auto it = std::lower_bound(distinct.begin(), distinct.end(), phi - 1e-9);
    return static_cast<int>(it - distinct.begin());
  };

  std::map<long, std::map<double, std::vector<std::pair<int, double>>>> grouped;
  for (const Row& r : rows) grouped[r.rep][r.t].emplace_back(angle_index(r.phi), r.r);

  ProfileDataset out;
  out.angles = distinct;
  for (const auto& [t, v] : grouped.begin()->second) out.times.push_back(t);
  for (const auto& [rep, by_time] : grouped) {
    std::vector<double> times;
    for (const auto& [t, v] : by_time) times.push_back(t);
    if (times != out.times)
      throw NonUniformGrid("replicate " + std::to_string(rep) + " does not share the observation times of the others");
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(times.size()), n, std::nan(""));
    Eigen::Index i = 0;
    for (const auto& [t, v] : by_time) {
      for (const auto& [j, r] : v) {
        if (!std::isnan(m(i, j)))
          throw MalformedFile("duplicate row for t = " + format_double(t) + ", phi = " +
                              format_double(distinct[static_cast<std::size_t>(j)]));
        m(i, j) = r;
      }
      if (static_cast<int>(v.size()) != n)
        throw NonUniformGrid("t = " + format_double(t) + " (replicate " + std::to_string(rep) + ") has " +
                             std::to_string(v.size()) + " of " + std::to_string(n) + " angles");
      ++i;
    }
    out.radii.push_back(std::move(m));
  }
  return out;
}

ProfileDataset ingest_profiles(const std::string& path, const std::string& format, bool require_positive) {
  if (format != "csv") throw InvalidArgument("unsupported profile format '" + format + "' (expected csv)");
  std::ifstream is(path);
  if (!is) throw MalformedFile("cannot open '" + path + "'");
  return read_profiles_csv(is, require_positive);
}

ProfileDataset dataset_from_histories(std::span<const GrowthHistory> histories) {
  if (histories.empty()) throw InsufficientData("no histories");
  ProfileDataset out;
  out.times = histories.front().times;
  for (int j = 0; j < histories.front().n_angles; ++j) out.angles.push_back(histories.front().angle(j));
  for (const GrowthHistory& h : histories) {
    if (h.times != out.times || h.n_angles != out.n_angles())
      throw InvalidArgument("histories must share observation times and angular grid");
    out.radii.push_back(h.radii);
  }
  return out;
}

void write_profiles_csv(std::ostream& os, const ProfileDataset& dataset) {
  os << "t,phi,r,replicate\n";
  for (int r = 0; r < dataset.replicates(); ++r)
    for (std::size_t i = 0; i < dataset.times.size(); ++i)
      for (int j = 0; j < dataset.n_angles(); ++j)
        os << format_double(dataset.times[i]) << ',' << format_double(dataset.angles[static_cast<std::size_t>(j)])
           << ',' << format_double(dataset.radii[static_cast<std::size_t>(r)](static_cast<Eigen::Index>(i), j)) << ','
           << r << '\n';
}

// --- empirical moments -----------------------------------------------------------------------------

std::vector<int> lag_ladder(int n_angles, int n_lags) {
  if (n_angles < 2 || n_lags < 1) throw InvalidArgument("lag ladder needs n_angles >= 2 and n_lags >= 1");
  const int half = n_angles / 2;
  std::vector<int> out;
  for (int i = 0; i < n_lags; ++i) {
    const int step = n_lags == 1 ? 0 : static_cast<int>(std::lround(static_cast<double>(i) * half / (n_lags - 1)));
    if (out.empty() || step != out.back()) out.push_back(step);
  }
  return out;
}

EmpiricalMoments empirical_moments(const ProfileDataset& dataset, int n_lags) {
  const int reps = dataset.replicates();
  const int n = dataset.n_angles();
  const auto nt = static_cast<Eigen::Index>(dataset.times.size());
  if (reps < 1 || nt < 1) throw InsufficientData("need at least one profile per time");
  if (reps == 1 && n < 2) throw InsufficientData("a single replicate needs at least two angles");

  EmpiricalMoments out;
  out.times = dataset.times;
  out.lag_steps = lag_ladder(n, n_lags);
  out.dphi = kTwoPi / n;
  out.replicates = reps;
  const auto nl = static_cast<Eigen::Index>(out.lag_steps.size());
  out.mean.resize(nt);
  out.spatial_cov.resize(nt, nl);
  out.temporal_cov.resize(nt, nt);

  // Centered profiles: across replicates per angle, or across angles for a single replicate.
  std::vector<Eigen::MatrixXd> centered(static_cast<std::size_t>(nt));
  double denom;
  if (reps >= 2) {
    for (Eigen::Index i = 0; i < nt; ++i) {
      Eigen::MatrixXd x = dataset.at_time(static_cast<std::size_t>(i));
      const Eigen::RowVectorXd m = x.colwise().mean();
      out.mean[i] = m.mean();
      centered[static_cast<std::size_t>(i)] = x.rowwise() - m;
    }
    denom = static_cast<double>(reps - 1) * n;
  } else {
    for (Eigen::Index i = 0; i < nt; ++i) {
      const Eigen::RowVectorXd x = dataset.radii.front().row(i);
      out.mean[i] = x.mean();
      centered[static_cast<std::size_t>(i)] = (x.array() - out.mean[i]).matrix();
    }
    denom = static_cast<double>(n - 1);
  }
  for (Eigen::Index i = 0; i < nt; ++i) {
    const Eigen::MatrixXd& c = centered[static_cast<std::size_t>(i)];
    for (Eigen::Index l = 0; l < nl; ++l) {
      const int step = out.lag_steps[static_cast<std::size_t>(l)];
      double sum = 0.0;
      for (int j = 0; j < n; ++j) sum += c.col(j).dot(c.col((j + step) % n));
      out.spatial_cov(i, l) = sum / denom;
    }
    for (Eigen::Index i2 = 0; i2 <= i; ++i2) {
      const double v = (c.array() * centered[static_cast<std::size_t>(i2)].array()).sum() / denom;
      out.temporal_cov(i, i2) = out.temporal_cov(i2, i) = v;
    }
  }
  out.variance = out.spatial_cov.col(0);
  return out;
}

// --- method of moments -----------------------------------------------------------------------------

EmpiricalMoments analytic_moments(const GrowthModelSpec& spec, const GridSpec& grid, std::span<const double> times,
                                  std::span<const int> lag_steps, MomentMode mode) {
  const MomentEngine engine(spec, grid, mode);
  const int n = grid.n_angles();
  const int col0 = grid.col_of(0.0);
  auto angle = [&](int step) { return grid.angle_mid((col0 + step) % n); };
  const auto nt = static_cast<Eigen::Index>(times.size());
  const auto nl = static_cast<Eigen::Index>(lag_steps.size());

  EmpiricalMoments out;
  out.times.assign(times.begin(), times.end());
  out.lag_steps.assign(lag_steps.begin(), lag_steps.end());
  out.dphi = grid.dphi();
  out.mean.resize(nt);
  out.spatial_cov.resize(nt, nl);
  out.temporal_cov.resize(nt, nt);

  const double phi0 = angle(0);
  if (spec.is_exponential()) {
    // R = c(phi) exp(D + X): E R = c e^D E e^X, Cov = E R_1 E R_2 (relative second moment - 1).
    auto mean_r = [&](double t, double phi) {
      const EvalPoint p{t, phi};
      const double one = 1.0;
      return apply_link(spec, phi, deterministic_part(spec, t, phi)) *
             engine.mixed_exponential_moment(std::span<const EvalPoint>(&p, 1), std::span<const double>(&one, 1));
    };
    for (Eigen::Index i = 0; i < nt; ++i) {
      const double t = times[static_cast<std::size_t>(i)];
      const double m0 = mean_r(t, phi0);
      out.mean[i] = m0;
      for (Eigen::Index l = 0; l < nl; ++l) {
        const double phi = angle(lag_steps[static_cast<std::size_t>(l)]);
        out.spatial_cov(i, l) = m0 * mean_r(t, phi) * (engine.relative_second_moment({t, phi0}, {t, phi}) - 1.0);
      }
      for (Eigen::Index i2 = 0; i2 <= i; ++i2) {
        const double t2 = times[static_cast<std::size_t>(i2)];
        out.temporal_cov(i, i2) = out.temporal_cov(i2, i) =
            m0 * mean_r(t2, phi0) * (engine.relative_second_moment({t, phi0}, {t2, phi0}) - 1.0);
      }
    }
  } else if (mode == MomentMode::Mesh && spec.basis.factorizable() && spec.basis.kind() != BasisKind::Poisson) {
    // Cell sums straight from the kernel tables: Cov = sum_rows cell V sum_m K_1(row, m) K_2(row, m - lag).
    auto slope = [&](double phi) { return apply_link(spec, phi, 1.0) - apply_link(spec, phi, 0.0); };
    const double mean_z = spot_mean(spec.basis.spot);
    const double var_z = spot_variance(spec.basis.spot);
    Eigen::VectorXd cells(grid.n_rows());
    for (int row = 0; row < grid.n_rows(); ++row) cells[row] = cell_measure(grid, spec.basis.control, row);
    std::vector<Eigen::MatrixXd> k;
    for (double t : times) {
      const StochasticKernel kernel(spec, t);
      detail::check_region_inside(kernel.window(), grid);
      k.push_back(kernel.on_grid(grid));
    }
    auto cov = [&](std::size_t a, std::size_t b, int step) {
      double total = 0.0;
      for (int row = 0; row < grid.n_rows(); ++row) {
        if (cells[row] == 0.0) continue;
        double sum = 0.0;
        for (int m = 0; m < n; ++m) {
          const double ka = k[a](row, m);
          if (ka != 0.0) sum += ka * k[b](row, ((m - step) % n + n) % n);
        }
        total += sum * cells[row];
      }
      return total * var_z;
    };
    for (Eigen::Index i = 0; i < nt; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      const double t = times[ii];
      out.mean[i] = apply_link(spec, phi0, deterministic_part(spec, t, phi0) + mean_z * (k[ii].transpose() * cells).sum());
      for (Eigen::Index l = 0; l < nl; ++l) {
        const int step = lag_steps[static_cast<std::size_t>(l)];
        out.spatial_cov(i, l) = slope(phi0) * slope(angle(step)) * cov(ii, ii, step);
      }
      for (Eigen::Index i2 = 0; i2 <= i; ++i2)
        out.temporal_cov(i, i2) = out.temporal_cov(i2, i) =
            slope(phi0) * slope(phi0) * cov(ii, static_cast<std::size_t>(i2), 0);
    }
  } else {
    // R = a(phi) L + b(phi) with L = D + X.
    auto slope = [&](double phi) { return apply_link(spec, phi, 1.0) - apply_link(spec, phi, 0.0); };
    for (Eigen::Index i = 0; i < nt; ++i) {
      const double t = times[static_cast<std::size_t>(i)];
      out.mean[i] = apply_link(spec, phi0, engine.mean_linear({t, phi0}));
      for (Eigen::Index l = 0; l < nl; ++l) {
        const double phi = angle(lag_steps[static_cast<std::size_t>(l)]);
        out.spatial_cov(i, l) = slope(phi0) * slope(phi) * engine.cov_linear({t, phi0}, {t, phi});
      }
      for (Eigen::Index i2 = 0; i2 <= i; ++i2)
        out.temporal_cov(i, i2) = out.temporal_cov(i2, i) =
            slope(phi0) * slope(phi0) * engine.cov_linear({t, phi0}, {times[static_cast<std::size_t>(i2)], phi0});
    }
  }
  out.variance = out.spatial_cov.col(0);
  return out;
}

double moment_objective(const EmpiricalMoments& empirical, const EmpiricalMoments& model, bool match_mean) {
  if (empirical.spatial_cov.rows() != model.spatial_cov.rows() ||
      empirical.spatial_cov.cols() != model.spatial_cov.cols())
    throw InvalidArgument("empirical and model moments have different layouts");
  double total = 0.0;
  for (Eigen::Index i = 0; i < empirical.spatial_cov.rows(); ++i) {
    const double scale = empirical.variance[i];
    if (!(scale > 0.0)) throw InsufficientData("empirical variance is zero at t = " + format_double(empirical.times[static_cast<std::size_t>(i)]));
    total += ((empirical.spatial_cov.row(i) - model.spatial_cov.row(i)) / scale).squaredNorm();
    if (match_mean) {
      const double d = (empirical.mean[i] - model.mean[i]) / std::sqrt(scale);
      total += d * d;
    }
  }
  return total;
}

FitResult fit_moments(const MomentFitProblem& problem, const EmpiricalMoments& empirical, const FitOptions& options) {
  if (!problem.model) throw InvalidArgument("moment fit needs a model factory");
  if (std::abs(empirical.dphi - problem.grid.dphi()) > 1e-12)
    throw InvalidArgument("dataset has " + format_double(kTwoPi / empirical.dphi) + " angles but the model grid has " +
                          std::to_string(problem.grid.n_angles()));
  const auto objective = [&](std::span<const double> x) {
    try {
      const EmpiricalMoments model =
          analytic_moments(problem.model(x), problem.grid, empirical.times, empirical.lag_steps, problem.mode);
      return moment_objective(empirical, model, problem.match_mean);
    } catch (const DomainError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  FitResult result = minimize_bounded(objective, problem.params, options);
  assess_identifiability(objective, problem.params, result);
  return result;
}

FitResult fit_moments(const MomentFitProblem& problem, const ProfileDataset& dataset, const FitOptions& options,
                      int n_lags) {
  if (!problem.params.empty() && problem.model) {
    std::vector<double> start;
    for (const ParamSpec& p : problem.params) start.push_back(p.start);
    if (problem.model(start).is_exponential() && !dataset.all_positive())
      throw NonPositiveRadius("exponential models need strictly positive radii");
  }
  return fit_moments(problem, empirical_moments(dataset, n_lags), options);
}

MomentFitProblem ex4_fit_problem(const GridSpec& grid) {
  MomentFitProblem problem;
  const GrowthModelSpec base = example_preset("ex4");
  problem.model = [base](std::span<const double> x) {
    GrowthModelSpec s = base;
    s.basis.spot = GaussianSpot{0.0, x[0]};
    s.ambit = Rectangular{TimeFunction::constant(x[1]), TimeFunction::proportional(0.2)};
    return s;
  };
  problem.params = {{"sigma2", 0.05, 20.0, 1.0}, {"Theta", 0.01, kPi / 2.0, 0.3}};
  problem.grid = grid;
  return problem;
}

MomentFitProblem tumour_fit_problem(const GridSpec& grid, double t, const SpotLaw& spot, double drift) {
  const GrowthModelSpec base = example_preset("tumour");
  const auto& table = std::get<TumourWeight>(base.weight.kind()).table;
  const TumourRow& target = table.at(t);
  MomentFitProblem problem;
  problem.model = [base, table, target, spot, drift](std::span<const double> x) {
    std::vector<TumourRow> rows = table.rows();
    for (TumourRow& r : rows)
      if (r.t == target.t) {
        r.alpha = x[0];
        r.beta = x[1];
      }
    const TumourTable fitted(rows);
    GrowthModelSpec s = base;
    s.weight = TumourWeight{fitted};
    s.ambit = TumourSet{fitted};
    s.basis.spot = spot;
    s.drift = ConstantDrift{drift};
    return s;
  };
  problem.params = {{"alpha", 0.0, 0.2, 0.05}, {"beta", -0.2, 0.2, 0.0}};
  problem.grid = grid;
  problem.match_mean = true;
  return problem;
}

// --- Fourier likelihood ----------------------------------------------------------------------------

std::vector<FourierSeries> dataset_fourier(const ProfileDataset& dataset, int k_max) {
  std::vector<FourierSeries> out;
  for (const Eigen::MatrixXd& m : dataset.radii) {
    GrowthHistory h;
    h.times = dataset.times;
    h.radii = m;
    h.n_angles = dataset.n_angles();
    out.push_back(radial_fourier(h, k_max));
  }
  return out;
}

FitResult fit_fourier_mle(const FourierMleProblem& problem, std::span<const FourierSeries> series,
                          const FitOptions& options) {
  if (!problem.tau) throw InvalidArgument("Fourier likelihood fit needs a tau family");
  if (problem.k_lo < 1 || problem.k_hi < problem.k_lo)
    throw InvalidArgument("Fourier likelihood fit needs 1 <= k_lo <= k_hi");
  if (series.empty()) throw InsufficientData("no coefficient series");
  const auto objective = [&](std::span<const double> x) {
    const TauFn tau = problem.tau(x);
    double total = 0.0;
    for (const FourierSeries& s : series) total -= gaussian_loglik(s, problem.k_lo, problem.k_hi, tau);
    return total;
  };
  FitResult result = minimize_bounded(objective, problem.params, options);
  assess_identifiability(objective, problem.params, result);
  return result;
}

FitResult fit_fourier_mle(const FourierMleProblem& problem, const ProfileDataset& dataset, const FitOptions& options) {
  return fit_fourier_mle(problem, dataset_fourier(dataset, problem.k_hi), options);
}

}  // namespace lgm
