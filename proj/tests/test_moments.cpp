#include "doctest.h"
#include "lgm/moments.hpp"
#include "lgm/random.hpp"
#include "stats.hpp"

using namespace lgm;

namespace {

GrowthModelSpec rect_model(SpotLaw spot, double f) {
  GrowthModelSpec s;
  s.kind = ModelKind::DirectRadial;
  s.drift = ConstantDrift{2.0};
  s.weight = ConstantWeight{f};
  s.basis.spot = spot;
  s.ambit = Rectangular{TimeFunction::constant(0.6), TimeFunction::constant(4.0)};
  return s;
}

}  // namespace

TEST_SUITE("moments") {

TEST_CASE("exact mode reproduces the closed-form measures") {
  const GridSpec grid(64, 1.0, 0.0, 20.0);
  const MomentEngine e(rect_model(GaussianSpot{0.5, 3.0}, 2.0), grid, MomentMode::Exact);
  const Rectangular r{TimeFunction::constant(0.6), TimeFunction::constant(4.0)};
  const ControlMeasure leb;
  CHECK(e.mean_linear({15.0, 0.1}) == doctest::Approx(2.0 + 2.0 * 0.5 * measure(r, 15.0, leb)).epsilon(1e-8));
  CHECK(e.var_linear({15.0, 0.1}) == doctest::Approx(4.0 * 3.0 * measure(r, 15.0, leb)).epsilon(1e-8));
  CHECK(e.cov_linear({15.0, 0.1}, {16.0, 0.6}) ==
        doctest::Approx(4.0 * 3.0 * intersection_measure(r, 15.0, 0.1, 16.0, 0.6, leb)).epsilon(1e-7));
}

TEST_CASE("refinement moves mesh moments towards the exact values") {
  const GridSpec grid(50, 1.0, 0.0, 20.0);
  const GrowthModelSpec spec = rect_model(GaussianSpot{0.0, 1.0}, 1.0);
  const double phi = grid.angle_mid(3);
  const double exact = MomentEngine(spec, grid, MomentMode::Exact).var_linear({15.0, phi});
  const double mesh = MomentEngine(spec, grid, MomentMode::Mesh).var_linear({15.0, phi});
  const double fine = MomentEngine(spec, grid, MomentMode::Fine).var_linear({15.0, phi});
  CHECK(std::abs(fine - exact) < std::abs(mesh - exact));
  CHECK(mesh == doctest::Approx(mesh_measure(spec.ambit, 15.0, spec.basis.control, grid)));
}

TEST_CASE("Poisson moments always use exact point geometry") {
  const GridSpec grid(40, 1.0, 0.0, 20.0);
  const GrowthModelSpec spec = rect_model(PoissonSpot{}, 1.0);
  CHECK(MomentEngine(spec, grid, MomentMode::Mesh).var_linear({15.0, 0.0}) ==
        MomentEngine(spec, grid, MomentMode::Exact).var_linear({15.0, 0.0}));
}

TEST_CASE("covariance is symmetric") {
  const GridSpec grid(40, 1.0, 0.0, 20.0);
  const MomentEngine e(rect_model(GammaSpot{2.0, 3.0}, 0.7), grid);
  CHECK(e.cov_linear({12.0, 0.2}, {14.0, -0.3}) == doctest::Approx(e.cov_linear({14.0, -0.3}, {12.0, 0.2})));
}

TEST_CASE("constant-weight overlap exponent") {
  for (double f : {0.1, 0.5, 1.4}) {
    const double closed = -2.0 * std::log(1.0 - 2.0 * f / 3.0) + 2.0 * 2.0 * std::log(1.0 - f / 3.0);
    CHECK(std::abs(c_bar(GammaSpot{2.0, 3.0}, f) - closed) < 1e-12);
    CHECK(c_bar(GaussianSpot{0.4, 2.0}, f) == doctest::Approx(2.0 * f * f));
    CHECK(c_bar(PoissonSpot{}, f) == doctest::Approx(std::pow(std::exp(f) - 1.0, 2)));
  }
}

TEST_CASE("relative second moment equals exp of the overlap exponent") {
  const GridSpec grid(64, 1.0, 0.0, 20.0);
  for (const SpotLaw& spot : {SpotLaw{GaussianSpot{0.0, 0.5}}, SpotLaw{GammaSpot{2.0, 3.0}}}) {
    const MomentEngine e(rect_model(spot, 0.3), grid, MomentMode::Exact);
    const double m = intersection_measure(e.spec().ambit, 15.0, 0.0, 15.0, 0.5, ControlMeasure{});
    CHECK(e.relative_second_moment({15.0, 0.0}, {15.0, 0.5}) ==
          doctest::Approx(std::exp(c_bar(spot, 0.3) * m)).epsilon(1e-7));
  }
}

TEST_CASE("exponential moments outside the Laplace domain") {
  const GridSpec grid(32, 1.0, 0.0, 20.0);
  const MomentEngine e(rect_model(GammaSpot{2.0, 1.0}, 0.6), grid);
  const EvalPoint p[] = {{15.0, 0.0}, {15.0, 0.1}};
  const double lambda[] = {1.0, 1.0};
  CHECK_THROWS_AS(e.mixed_exponential_moment(p, lambda), KumulantDomainError);
  const double half[] = {0.5, 0.5};
  CHECK(e.mixed_exponential_moment(p, half) > 1.0);
}

TEST_CASE("jackknife of a mean is the usual standard error") {
  Engine engine = make_engine(4);
  std::normal_distribution<double> n(1.0, 2.0);
  Eigen::MatrixXd x(500, 1);
  std::vector<double> v;
  for (int i = 0; i < 500; ++i) v.push_back(x(i, 0) = n(engine));
  const Estimate e = jackknife(x, [](const Eigen::VectorXd& m) { return m[0]; });
  const auto s = lgm_test::summarize(v);
  CHECK(e.value == doctest::Approx(s.mean));
  CHECK(e.se == doctest::Approx(s.se).epsilon(1e-10));
}

TEST_CASE("Monte Carlo verification of the linear model") {
  const GridSpec grid(60, 1.0, 0.0, 20.0);
  const double phi = grid.angle_mid(0);
  std::vector<MomentQuery> q = {{QueryKind::Mean, {{15.0, phi}}, {}, "mean"},
                                {QueryKind::Variance, {{15.0, phi}}, {}, "var"},
                                {QueryKind::Covariance, {{15.0, phi}, {16.0, phi + 0.3}}, {}, "cov"},
                                {QueryKind::RelativeSecondMoment, {{15.0, phi}, {15.0, phi + 0.2}}, {}, "rel"},
                                {QueryKind::MixedExponential, {{15.0, phi}, {16.0, phi}}, {0.2, 0.1}, "mix"}};
  for (const SpotLaw& spot : {SpotLaw{GaussianSpot{0.0, 0.3}}, SpotLaw{GammaSpot{2.0, 4.0}}, SpotLaw{PoissonSpot{}}}) {
    const VerifyReport r = mc_verify(rect_model(spot, 0.2), grid, q, 3000, 21, 0);
    CHECK(r.records.size() == q.size());
    for (const VerifyRecord& rec : r.records) {
      INFO(to_string(rec.query.kind), " analytic ", rec.analytic, " mc ", rec.mc, " z ", rec.z);
      CHECK(std::abs(rec.z) <= 4.0);
    }
  }
}

TEST_CASE("verification is deterministic and thread-count independent") {
  const GridSpec grid(40, 1.0, 0.0, 20.0);
  std::vector<MomentQuery> q = {{QueryKind::Variance, {{15.0, 0.0}}, {}, "var"}};
  const auto a = mc_verify(rect_model(GammaSpot{2.0, 4.0}, 1.0), grid, q, 400, 3, 1);
  const auto b = mc_verify(rect_model(GammaSpot{2.0, 4.0}, 1.0), grid, q, 400, 3, 4);
  CHECK(a.records[0].mc == b.records[0].mc);
  CHECK(a.records[0].se == b.records[0].se);
}

}  // TEST_SUITE
