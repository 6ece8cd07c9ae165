#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lgm/ambit.hpp"
#include "lgm/circle_cov.hpp"
#include "lgm/fourier_radial.hpp"
#include "lgm/growth.hpp"
#include "lgm/inference.hpp"
#include "lgm/levy_core.hpp"
#include "lgm/moments.hpp"
#include "lgm/parallel.hpp"
#include "lgm/random.hpp"
#include "stats.hpp"

using namespace lgm;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  std::string failed;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      failed += " [failed: " + what + "]";
    }
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::vector<GrowthHistory> simulate_many(const GrowthModelSpec& spec, const GridSpec& grid,
                                         const std::vector<double>& times, int reps, std::uint64_t seed) {
  const GrowthSimulator sim(spec, grid, times);
  std::vector<GrowthHistory> out(static_cast<std::size_t>(reps));
  parallel_for(reps, 0, [&](int r) { out[static_cast<std::size_t>(r)] = sim.simulate(derive_seed(seed, r)); });
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

GrowthModelSpec direct_model(AmbitFamily ambit, SpotLaw spot, WeightFunction weight = ConstantWeight{1.0}) {
  GrowthModelSpec s;
  s.kind = ModelKind::DirectRadial;
  s.drift = ConstantDrift{0.0};
  s.weight = std::move(weight);
  s.basis.spot = spot;
  s.ambit = std::move(ambit);
  return s;
}

// Arcs of half-width (m + 1/2) dphi and windows on row boundaries: the grid sees the exact sets.
constexpr int kRectAngles = 100;
const GridSpec kRectGrid(kRectAngles, 0.1, 0.0, 10.0);
const Rectangular kRect{TimeFunction::constant(7.5 * kTwoPi / kRectAngles), TimeFunction::constant(3.0)};

double angle_at(int col) { return kRectGrid.angle_mid(col); }

// 1. Spot moments.
Outcome spot_moments() {
  Outcome o;
  const GammaSpot gamma{2.0, 4.0};
  const InverseGaussianSpot ig{2.0, 1.0};
  o.require(spot_mean(gamma) == 0.5 && spot_variance(gamma) == 0.125, "Gamma closed form");
  o.require(spot_mean(ig) == 2.0 && spot_variance(ig) == 2.0, "IG closed form");
  // 10^5 cells of unit measure.
  const GridSpec grid(100, 1.0, 0.0, 1000.0);
  BasisSpec spec;
  spec.control = ControlMeasure::constant(1.0 / grid.dphi());
  double worst = 0.0;
  for (const SpotLaw& spot : {SpotLaw(gamma), SpotLaw(ig)}) {
    spec.spot = spot;
    const BasisRealization z = sample_realization(spec, grid, 2024);
    const Eigen::MatrixXd& inc = z.increments();
    std::vector<double> x(inc.data(), inc.data() + inc.size());
    const lgm_test::Summary s = lgm_test::summarize(x);
    const double zm = (s.mean - spot_mean(spot)) / s.se;
    const double zv = (s.var - spot_variance(spot)) / lgm_test::variance_se(x);
    worst = std::max({worst, std::abs(zm), std::abs(zv)});
    o.require(std::abs(zm) <= 3.0 && std::abs(zv) <= 3.0, std::string(to_string(kind_of(spot))) + " Monte Carlo");
  }
  o.detail << "exact means/variances match; n=" << 100000 << " max|z|=" << fmt(worst);
  return o;
}

// 2. Covariance of the Gaussian, f = 1 rectangular model.
Outcome rectangular_covariance() {
  Outcome o;
  const GrowthModelSpec spec = direct_model(kRect, GaussianSpot{0.0, 1.7});
  const std::vector<std::pair<EvalPoint, EvalPoint>> pairs = {
      {{8.0, angle_at(50)}, {8.0, angle_at(50)}}, {{8.0, angle_at(50)}, {8.0, angle_at(53)}},
      {{8.0, angle_at(50)}, {8.0, angle_at(60)}}, {{8.0, angle_at(50)}, {9.0, angle_at(50)}},
      {{8.0, angle_at(50)}, {9.0, angle_at(56)}}, {{6.0, angle_at(10)}, {8.0, angle_at(12)}},
      {{9.0, angle_at(0)}, {9.0, angle_at(98)}},  {{5.0, angle_at(30)}, {7.5, angle_at(27)}}};
  std::vector<MomentQuery> queries;
  for (const auto& [a, b] : pairs) queries.push_back({QueryKind::Covariance, {a, b}, {}, ""});
  const VerifyReport report = mc_verify(spec, kRectGrid, queries, 10000, 12);
  double worst = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [a, b] = pairs[i];
    const double analytic = 1.7 * intersection_measure(kRect, a.t, a.phi, b.t, b.phi, ControlMeasure{});
    const double z = (report.records[i].mc - analytic) / report.records[i].se;
    worst = std::max(worst, std::abs(z));
  }
  o.require(worst <= 3.0, "|z| <= 3 at every probe pair");
  o.detail << "8 probe pairs, 10^4 replicates, max|z|=" << fmt(worst);
  return o;
}

// 3. Relative second moment.
Outcome relative_second_moment() {
  Outcome o;
  const GammaSpot gamma{2.0, 4.0};
  const double f = 0.6;
  double cb_err = 0.0;
  for (double ff : {0.1, 0.6, 1.2, 1.9})
    cb_err = std::max(cb_err, std::abs(c_bar(gamma, ff) - (-2.0 * std::log(1.0 - 2.0 * ff / 4.0) +
                                                           4.0 * std::log(1.0 - ff / 4.0))));
  o.require(cb_err <= 1e-12, "Gamma c_bar closed form");
  const std::vector<std::pair<EvalPoint, EvalPoint>> pairs = {{{8.0, angle_at(50)}, {8.0, angle_at(54)}},
                                                              {{8.0, angle_at(50)}, {9.0, angle_at(50)}},
                                                              {{8.0, angle_at(50)}, {9.5, angle_at(45)}}};
  double worst = 0.0;
  for (const SpotLaw& spot : {SpotLaw(GaussianSpot{0.0, 1.0}), SpotLaw(gamma)}) {
    const GrowthModelSpec spec = direct_model(kRect, spot, ConstantWeight{f});
    std::vector<MomentQuery> queries;
    for (const auto& [a, b] : pairs) queries.push_back({QueryKind::RelativeSecondMoment, {a, b}, {}, ""});
    const VerifyReport report = mc_verify(spec, kRectGrid, queries, 10000, 31);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto& [a, b] = pairs[i];
      const double analytic =
          std::exp(c_bar(spot, f) * intersection_measure(kRect, a.t, a.phi, b.t, b.phi, ControlMeasure{}));
      const double z = (report.records[i].mc - analytic) / report.records[i].se;
      worst = std::max(worst, std::abs(z));
    }
  }
  o.require(worst <= 3.0, "|z| <= 3");
  o.detail << "Gaussian and Gamma, 3 pairs each, 10^4 replicates, max|z|=" << fmt(worst)
           << ", c_bar closed-form error " << fmt(cb_err);
  return o;
}

// 4. Full-angle covariance with a tabulated Fourier weight.
Outcome full_angle_covariance() {
  Outcome o;
  Eigen::MatrixXd table(9, 3);
  for (int k = 0; k <= 8; ++k) {
    table(k, 0) = 1.0 / (1.0 + k);
    table(k, 1) = 0.8 / (1.0 + 0.5 * k);
    table(k, 2) = 0.5 / (1.0 + k * k * 0.1);
  }
  const FourierWeight w = FourierWeight::tabulated({0.0, 3.0, 6.0}, table);
  const TimeFunction lag = TimeFunction::constant(2.0);
  const ControlMeasure leb;
  const double var = 1.3;
  const CircleCovModel model(w, leb, lag, var);
  const GrowthModelSpec spec = direct_model(FullAngle{lag}, GaussianSpot{0.0, var}, w);
  const GridSpec grid(32, 0.02, 0.0, 6.0);

  const std::vector<std::pair<double, double>> time_pairs = {{5.0, 5.0}, {5.0, 6.0}, {6.0, 6.0}};
  std::vector<MomentQuery> queries;
  for (const auto& [t1, t2] : time_pairs)
    for (int m = 0; m < 8; ++m)
      queries.push_back({QueryKind::Covariance, {{t1, grid.angle_mid(3)}, {t2, grid.angle_mid(3 + 2 * m)}}, {}, ""});
  const VerifyReport report = mc_verify(spec, grid, queries, 20000, 7);
  double worst = 0.0;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const EvalPoint a = queries[i].points[0], b = queries[i].points[1];
    const double z = (report.records[i].mc - cov_full_angle(model, a.t, a.phi, b.t, b.phi)) / report.records[i].se;
    worst = std::max(worst, std::abs(z));
  }
  o.require(worst <= 3.0, "|z| <= 3");

  const MomentEngine exact(spec, grid, MomentMode::Exact);
  double rel = 0.0;
  for (const auto& [t1, t2] : time_pairs)
    for (double d : {0.0, 0.4, 1.1, 2.0, 3.0}) {
      const double a = cov_full_angle(model, t1, 0.0, t2, d);
      const double b = exact.cov_linear({t1, 0.0}, {t2, d});
      rel = std::max(rel, std::abs(a - b) / std::max(std::abs(a), 1e-3 * var));
    }
  o.require(rel <= 1e-6, "cov_full_angle equals cov_linear to 1e-6");
  o.detail << "24 queries, 2*10^4 replicates, max|z|=" << fmt(worst) << ", engine rel. diff " << fmt(rel);
  return o;
}

// 5. Intersection spectrum from the boundary coefficients.
double oracle_lambda(const std::function<double(double)>& h, int j) {
  const ControlMeasure leb;
  const auto f = [&](double phi) { return mu_self_intersection_direct(h, leb, std::abs(phi)) * std::cos(j * phi); };
  double v = 0.0;
  for (double lo = -kPi; lo < kPi - 1e-12; lo += kPi / 4.0)
    v += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, lo + kPi / 4.0, 10, 1e-14);
  return j == 0 ? v / kTwoPi : v / kPi;
}

Outcome intersection_spectrum() {
  Outcome o;
  const double g0 = 7.0, g1 = 3.0;
  const std::vector<double> gamma1 = {g0, g1};
  const auto lambda = lambda_from_hbar(gamma1, 12);
  const double l0 = (kTwoPi - 16.0 / kPi) * g1 - kTwoPi * g0;
  bool closed = std::abs(lambda[0] - l0) <= 1e-14 * std::abs(l0);
  double fit = 0.0;
  for (int j = 1; j < 12; ++j) {
    const double lj = 16.0 / kPi * g1 / (4.0 * j * j - 1.0);
    closed = closed && std::abs(lambda[static_cast<std::size_t>(j)] - lj) <= 1e-14 * lj;
    const double alpha = -kPi / (16.0 * g1), beta = kPi / (4.0 * g1);
    fit = std::max(fit, std::abs(1.0 / lambda[static_cast<std::size_t>(j)] - (alpha + beta * j * j)));
  }
  o.require(closed, "single-harmonic closed form");
  o.require(fit <= 1e-10, "1/lambda_j = alpha + beta j^2");

  const std::vector<double> gamma = {10.0, 1.2, 0.3, 0.2, 0.05, 0.08};
  const auto h = [&](double th) {
    double v = 0.0;
    for (std::size_t k = 0; k < gamma.size(); ++k) v += gamma[k] * std::cos(static_cast<double>(k) * th);
    return v;
  };
  const auto series = lambda_from_hbar(gamma, 10);
  double worst_j = 0.0;
  for (int j = 1; j < 10; ++j)
    worst_j = std::max(worst_j, std::abs(series[static_cast<std::size_t>(j)] - oracle_lambda(h, j)));
  const double oracle0 = oracle_lambda(h, 0);
  const double diff0 = std::abs(series[0] - oracle0);
  o.require(worst_j <= 1e-5, "lambda_j (j >= 1) against the quadrature oracle");
  o.require(diff0 <= 1e-5, "lambda_0 against the quadrature oracle");
  o.detail << "closed form ok=" << (closed ? "yes" : "no") << ", fit err " << fmt(fit) << ", order-5 max|dlambda_j|="
           << fmt(worst_j) << ", lambda_0 series " << fmt(series[0]) << " vs oracle " << fmt(oracle0);
  return o;
}

// 6. ex3 mean rate.
Outcome example3_rate() {
  Outcome o;
  const GrowthModelSpec spec = example_preset("ex3");
  const GridSpec grid(100, 1.0, 0.0, 125.0);
  std::vector<double> times;
  for (double t = 75.0; t <= 125.0; t += 5.0) times.push_back(t);
  const auto hs = simulate_many(spec, grid, times, 200, 3);
  const double tbar = 100.0;
  double sxx = 0.0;
  for (double t : times) sxx += (t - tbar) * (t - tbar);
  std::vector<double> slopes;
  for (const GrowthHistory& h : hs) {
    const Eigen::VectorXd avg = h.radii.rowwise().mean();
    double sxy = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) sxy += (times[i] - tbar) * avg[static_cast<Eigen::Index>(i)];
    slopes.push_back(sxy / sxx);
  }
  const lgm_test::Summary s = lgm_test::summarize(slopes);
  const double z = (s.mean - 10.0) / s.se;
  o.require(std::abs(z) <= 3.0, "slope within 3 SE of 10");
  o.detail << "mean slope " << fmt(s.mean) << " (SE " << fmt(s.se) << "), z=" << fmt(z);
  return o;
}

// 7. Larger ambit sets give longer-range spatial correlation.
Outcome ambit_extension() {
  Outcome o;
  const GridSpec grid(100, 1.0, 0.0, 80.0);
  const MomentFitProblem problem = ex4_fit_problem(grid);
  const int lag = 5;  // pi / 10
  int wins = 0;
  double wide_sum = 0.0, narrow_sum = 0.0;
  for (int seed = 1; seed <= 20; ++seed) {
    double corr[2];
    int i = 0;
    for (double theta : {kPi / 5.0, kPi / 100.0}) {
      const auto hs =
          simulate_many(problem.model(std::vector<double>{1.0, theta}), grid, {80.0}, 200, 9000 + seed);
      const EmpiricalMoments m = empirical_moments(dataset_from_histories(hs), 11);
      const auto it = std::find(m.lag_steps.begin(), m.lag_steps.end(), lag);
      corr[i++] = m.spatial_cov(0, it - m.lag_steps.begin()) / m.variance[0];
    }
    wins += corr[0] > corr[1];
    wide_sum += corr[0];
    narrow_sum += corr[1];
  }
  o.require(wins >= 19, ">= 19 of 20 runs");
  o.detail << wins << "/20 runs, mean corr " << fmt(wide_sum / 20.0) << " (pi/5) vs " << fmt(narrow_sum / 20.0)
           << " (pi/100)";
  return o;
}

// 8. Gamma and IG runs matched to the Gaussian run.
Outcome moment_matching() {
  Outcome o;
  const GridSpec grid(100, 1.0, 0.0, 80.0);
  const std::vector<double> times = preset_times("ex4");
  const GrowthModelSpec gauss = example_preset("ex4");
  const auto measure = [&](double t) { return mesh_measure(gauss.ambit, t, gauss.basis.control, grid); };
  const GrowthModelSpec gamma = gamma_matched(gauss, 1.0, measure, times);
  const GrowthModelSpec ig = ig_matched(gauss, 1.0, measure, times);
  const int col = grid.col_of(0.0);
  auto column = [&](const GrowthModelSpec& spec, std::uint64_t seed) {
    const auto hs = simulate_many(spec, grid, times, 10000, seed);
    std::vector<std::vector<double>> x(times.size());
    for (const GrowthHistory& h : hs)
      for (std::size_t i = 0; i < times.size(); ++i) x[i].push_back(h.radii(static_cast<Eigen::Index>(i), col));
    return x;
  };
  const auto base = column(gauss, 1);
  double worst = 0.0;
  for (const auto& [spec, seed] : {std::pair{gamma, 2}, std::pair{ig, 3}}) {
    const auto other = column(spec, static_cast<std::uint64_t>(seed));
    for (std::size_t i = 0; i < times.size(); ++i) {
      const auto a = lgm_test::summarize(base[i]), b = lgm_test::summarize(other[i]);
      const double zm = (a.mean - b.mean) / std::hypot(a.se, b.se);
      const double zv = (a.var - b.var) / std::hypot(lgm_test::variance_se(base[i]), lgm_test::variance_se(other[i]));
      worst = std::max({worst, std::abs(zm), std::abs(zv)});
    }
  }
  o.require(worst <= 3.0, "|z| <= 3");
  o.detail << "Gamma and IG vs Gaussian, t in {20,45,80}, 10^4 replicates, max|z|=" << fmt(worst);
  return o;
}

// 9. Fourier coefficient structure.
Outcome fourier_structure() {
  Outcome o;
  const FourierWeight w = FourierWeight::constant({0.4, 0.9, 0.7, 0.6, 0.5, 0.4, 0.3});
  const TimeFunction lag = TimeFunction::constant(2.0);
  const CircleCovModel model(w, ControlMeasure{}, lag, 1.0);
  const GrowthModelSpec spec = direct_model(FullAngle{lag}, GaussianSpot{0.0, 1.0}, w);
  const GridSpec grid(32, 0.25, 0.0, 6.0);
  const auto hs = simulate_many(spec, grid, {6.0}, 10000, 17);
  const int k_max = 6;
  std::vector<std::vector<double>> a(k_max + 1), b(k_max + 1);
  for (const GrowthHistory& h : hs) {
    const FourierSeries s = radial_fourier(h, k_max);
    for (int k = 0; k <= k_max; ++k) {
      a[static_cast<std::size_t>(k)].push_back(s.a(0, k));
      b[static_cast<std::size_t>(k)].push_back(s.b(0, k));
    }
  }
  double worst_var = 0.0;
  for (int k = 1; k <= k_max; ++k) {
    const double tau = model.tau(k, 6.0, 6.0);
    for (const auto* x : {&a[static_cast<std::size_t>(k)], &b[static_cast<std::size_t>(k)]}) {
      const double z = (lgm_test::summarize(*x).var - tau) / lgm_test::variance_se(*x);
      worst_var = std::max(worst_var, std::abs(z));
    }
  }
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> order(1, k_max), channel(0, 2);
  double worst_cross = 0.0;
  for (int n = 0; n < 10; ++n) {
    int k = order(rng), j = order(rng);
    const int c = channel(rng);
    while (c != 2 && j == k) j = order(rng);
    const auto& x = c == 1 ? b[static_cast<std::size_t>(k)] : a[static_cast<std::size_t>(k)];
    const auto& y = c == 0 ? a[static_cast<std::size_t>(j)] : b[static_cast<std::size_t>(j)];
    const lgm_test::Summary cv = lgm_test::covariance(x, y);
    worst_cross = std::max(worst_cross, std::abs(cv.mean / cv.se));
  }
  o.require(worst_var <= 3.0, "Var(A_k), Var(B_k) within 3 SE of tau_k");
  o.require(worst_cross <= 3.0, "cross-order covariances within 3 SE of 0");
  o.detail << "k <= 6, 10^4 replicates, max|z| variances " << fmt(worst_var) << ", cross " << fmt(worst_cross);
  return o;
}

// 10. Inference round trips.
Outcome inference_round_trips() {
  Outcome o;
  const GridSpec grid(200, 1.0, 0.0, 80.0);
  const MomentFitProblem problem = ex4_fit_problem(grid);
  std::vector<double> es, et;
  int converged = 0;
  for (int seed = 1; seed <= 20; ++seed) {
    const ProfileDataset d =
        dataset_from_histories(simulate_many(example_preset("ex4"), grid, preset_times("ex4"), 500, 300 + seed));
    FitOptions opt;
    opt.seed = static_cast<std::uint64_t>(seed);
    opt.threads = 0;
    opt.require_convergence = false;
    const FitResult r = fit_moments(problem, d, opt);
    converged += r.converged;
    es.push_back(std::abs(r.estimates[0] - 1.0));
    et.push_back(std::abs(r.estimates[1] - kPi / 5.0) / (kPi / 5.0));
  }
  o.require(median(es) <= 0.15 && median(et) <= 0.15, "moment fit median relative error <= 15%");

  const FourierWeight w = FourierWeight::constant({0.0, 0.6, 0.5, 0.4, 0.3});
  const TimeFunction lag = TimeFunction::constant(2.0);
  const CircleCovModel model(w, ControlMeasure{}, lag);
  const double scale = 2.5;
  const GrowthModelSpec spec = direct_model(FullAngle{lag}, GaussianSpot{0.0, scale}, w);
  const GridSpec fgrid(64, 0.25, 0.0, 6.0);
  FourierMleProblem mle;
  mle.tau = [model](std::span<const double> x) {
    const double c = x[0];
    return TauFn([model, c](int k, double t, double t2) { return c * model.tau(k, t, t2); });
  };
  mle.params = {{"scale", 0.05, 50.0, 1.0}};
  mle.k_hi = 4;
  std::vector<double> ef;
  for (int seed = 1; seed <= 50; ++seed) {
    const ProfileDataset d = dataset_from_histories(simulate_many(spec, fgrid, {5.0, 6.0}, 20, 700 + seed));
    FitOptions opt;
    opt.seed = static_cast<std::uint64_t>(seed);
    opt.require_convergence = false;
    ef.push_back(std::abs(fit_fourier_mle(mle, d, opt).estimates[0] - scale) / scale);
  }
  o.require(median(ef) <= 0.10, "Fourier MLE median relative error <= 10%");
  o.detail << "moment fit median rel. err sigma2 " << fmt(median(es)) << ", Theta " << fmt(median(et)) << " ("
           << converged << "/20 converged); Fourier scale " << fmt(median(ef)) << " over 50 seeds";
  return o;
}

// 11. Determinism, additivity, independence.
Outcome determinism_additivity() {
  Outcome o;
  const GridSpec grid(120, 1.0, 0.0, 80.0);
  for (const char* id : {"ex4", "ex5", "ex6"}) {
    std::ostringstream a, b;
    write_history_csv(a, simulate(example_preset(id), grid, 77, preset_times(id)));
    write_history_csv(b, simulate(example_preset(id), grid, 77, preset_times(id)));
    o.require(a.str() == b.str(), std::string("byte-identical rerun of ") + id);
  }
  {
    const GrowthSimulator sim(example_preset("ex4"), grid, preset_times("ex4"));
    std::vector<GrowthHistory> one(8), many(8);
    parallel_for(8, 1, [&](int r) { one[static_cast<std::size_t>(r)] = sim.simulate(derive_seed(5, r)); });
    parallel_for(8, 0, [&](int r) { many[static_cast<std::size_t>(r)] = sim.simulate(derive_seed(5, r)); });
    for (int r = 0; r < 8; ++r)
      o.require(one[static_cast<std::size_t>(r)].radii == many[static_cast<std::size_t>(r)].radii,
                "identical across thread counts");
  }

  const GridSpec zgrid(40, 0.25, 0.0, 10.0);
  const RectRegion left({{-kPi, 0.0, 1.0, 6.0}});
  const RectRegion right({{0.0, kPi, 1.0, 6.0}});
  const RectRegion both({{-kPi, 0.0, 1.0, 6.0}, {0.0, kPi, 1.0, 6.0}});
  const auto one = [](double, double) { return 1.0; };
  double worst_add = 0.0, worst_z = 0.0;
  for (const SpotLaw& spot : {SpotLaw(GaussianSpot{0.5, 2.0}), SpotLaw(PoissonSpot{}), SpotLaw(GammaSpot{1.5, 2.0}),
                              SpotLaw(InverseGaussianSpot{1.0, 2.0})}) {
    BasisSpec spec;
    spec.spot = spot;
    spec.control = ControlMeasure::constant(0.5);
    std::vector<double> x, y;
    for (int r = 0; r < 4000; ++r) {
      const BasisRealization z = sample_realization(spec, zgrid, derive_seed(99, r));
      const double l = integrate(one, left, z), rr = integrate(one, right, z), w = integrate(one, both, z);
      const double err = std::abs(l + rr - w) / std::max(1.0, std::abs(w));
      if (kind_of(spot) == BasisKind::Poisson) o.require(err == 0.0, "Poisson additivity exact");
      worst_add = std::max(worst_add, err);
      x.push_back(l);
      y.push_back(rr);
    }
    const lgm_test::Summary cv = lgm_test::covariance(x, y);
    worst_z = std::max(worst_z, std::abs(cv.mean / cv.se));
  }
  o.require(worst_add <= 1e-13, "additivity over disjoint regions");
  o.require(worst_z <= 3.0, "independence of disjoint increments");
  o.detail << "reruns byte-identical; max additivity error " << fmt(worst_add) << " (rounding only); independence max|z|="
           << fmt(worst_z);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"spot moments (Gamma, IG)", spot_moments},
      {"rectangular covariance", rectangular_covariance},
      {"relative second moment", relative_second_moment},
      {"full-angle Fourier covariance", full_angle_covariance},
      {"intersection spectrum", intersection_spectrum},
      {"ex3 mean rate", example3_rate},
      {"ambit extension and correlation range", ambit_extension},
      {"Gamma/IG moment matching", moment_matching},
      {"Fourier coefficient structure", fourier_structure},
      {"inference round trips", inference_round_trips},
      {"determinism and additivity", determinism_additivity},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << criteria[i].first << ": "
              << o.detail.str() << o.failed << " (" << fmt(secs) << " s)" << std::endl;
  }
  std::cout << criteria.size() - static_cast<std::size_t>(failures) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failures == 0 ? 0 : 1;
}
