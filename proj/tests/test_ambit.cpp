#include "doctest.h"
#include "lgm/ambit.hpp"
#include "lgm/growth.hpp"

using namespace lgm;

namespace {

// Midpoint count of mu(A_{t1}(phi1) cap A_{t2}(phi2)) on an n x n mesh over [-pi, pi) x [lo, hi].
double brute_intersection(const AmbitFamily& f, double t1, double phi1, double t2, double phi2,
                          const ControlMeasure& c, double lo, double hi, int n) {
  const double dth = kTwoPi / n, ds = (hi - lo) / n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s = lo + (i + 0.5) * ds;
    const double g = c.g(s);
    if (g == 0.0) continue;
    for (int j = 0; j < n; ++j) {
      const double th = -kPi + (j + 0.5) * dth;
      if (contains(f, t1, phi1, th, s) && contains(f, t2, phi2, th, s)) sum += g;
    }
  }
  return sum * dth * ds;
}

std::vector<AmbitFamily> families() {
  return {FullAngle{TimeFunction::constant(2.0)},
          Rectangular{TimeFunction::constant(0.7), TimeFunction::constant(3.0)},
          Rectangular{TimeFunction::constant(kPi / 5.0), TimeFunction::proportional(0.2)},
          WedgeOverS{0.5, 1.0},
          cosine_boundary(1.5),
          example_preset("tumour").ambit};
}

}  // namespace

TEST_SUITE("ambit") {

TEST_CASE("ambit sets contain their apex and lie in the past") {
  for (const AmbitFamily& f : families())
    for (double t : {21.0, 30.0, 55.0})
      for (double phi : {-2.0, 0.0, 1.0}) {
        CHECK(contains(f, t, phi, phi, t - 1e-9));
        CHECK_FALSE(contains(f, t, phi, phi, t + 0.5));
        CHECK(window(f, t).hi <= t);
      }
}

TEST_CASE("rectangular measure and overlap") {
  const Rectangular r{TimeFunction::constant(0.7), TimeFunction::constant(3.0)};
  const ControlMeasure leb;
  CHECK(measure(r, 10.0, leb) == doctest::Approx(2.0 * 0.7 * 3.0));
  CHECK(intersection_measure(r, 10.0, 0.0, 10.0, 0.5, leb) == doctest::Approx((1.4 - 0.5) * 3.0).epsilon(1e-8));
  CHECK(intersection_measure(r, 10.0, 0.0, 11.0, 0.0, leb) == doctest::Approx(1.4 * 2.0).epsilon(1e-8));
  CHECK(intersection_measure(r, 10.0, 0.0, 10.0, 2.0, leb) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("full-angle measure") {
  const FullAngle f{TimeFunction::constant(2.0)};
  const ControlMeasure lin = ControlMeasure::linear(10.0);
  CHECK(measure(f, 5.0, lin) == doctest::Approx(kTwoPi * 5.0 * (25.0 - 9.0)));
  CHECK(intersection_measure(f, 5.0, 0.3, 6.0, -2.0, lin) == doctest::Approx(kTwoPi * 5.0 * (25.0 - 16.0)));
  // Support of g starts at 0.
  CHECK(measure(f, 1.0, lin) == doctest::Approx(kTwoPi * 5.0));
}

TEST_CASE("arc overlap") {
  CHECK(arc_overlap(0.5, 0.5, 0.2) == doctest::Approx(0.8));
  CHECK(arc_overlap(0.5, 0.3, 0.1) == doctest::Approx(0.6));
  CHECK(arc_overlap(0.5, 0.5, 1.2) == doctest::Approx(0.0));
  CHECK(arc_overlap(kPi, 0.3, 2.0) == doctest::Approx(0.6));
  CHECK(arc_overlap(2.0, 2.0, kPi) == doctest::Approx(2.0 * (4.0 - kPi)));
}

TEST_CASE("intersection measures agree with a brute-force mesh count") {
  const ControlMeasure leb;
  for (const AmbitFamily& f : families()) {
    const double t1 = 25.0, t2 = 26.0;
    const double lo = std::max(0.0, std::min(window(f, t1).lo, window(f, t2).lo));
    const double got = intersection_measure(f, t1, 0.1, t2, 0.4, leb);
    const double oracle = brute_intersection(f, t1, 0.1, t2, 0.4, leb, lo, t2, 1200);
    CHECK(got == doctest::Approx(oracle).epsilon(5e-3).scale(1.0));
    CHECK(intersection_measure_quadrature(f, t1, 0.1, t2, 0.4, leb) == doctest::Approx(got).epsilon(1e-6));
  }
}

TEST_CASE("wedge sets with a growing control measure") {
  const WedgeOverS w{0.5, 1.0};
  const ControlMeasure lin = ControlMeasure::linear(10.0);
  // Each slice at s has angular width 2 * 0.5 / s and weight 10 s: mu = 10 * T.
  CHECK(measure(w, 80.0, lin) == doctest::Approx(10.0).epsilon(1e-8));
  // Arcs of half-width 0.5 / s offset by 0.004 overlap on 1 / s - 0.004 for s in [79, 80].
  const double oracle = 10.0 * (1.0 - 0.004 * 79.5);
  CHECK(intersection_measure(w, 80.0, 0.0, 80.0, 0.004, lin) == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("boundary-function sets: direct formula agrees with the geometry") {
  const double c = 1.5, t = 10.0;
  const BoundaryFn f = cosine_boundary(c);
  const auto h = [&](double th) { return f.h(t, th); };
  const ControlMeasure leb;
  for (double phi : {0.0, 0.3, 1.0, 2.5, kPi}) {
    CHECK(mu_self_intersection_direct(h, leb, phi) ==
          doctest::Approx(intersection_measure_quadrature(f, t, 0.0, t, phi, leb)).epsilon(1e-7));
  }
}

TEST_CASE("factorized families: shortcut and scan agree") {
  const ControlMeasure leb;
  const auto w = [](double, double, double) { return 1.0; };
  for (const AmbitFamily& f :
       {AmbitFamily{Rectangular{TimeFunction::constant(0.7), TimeFunction::constant(3.0)}},
        AmbitFamily{WedgeOverS{0.5, 1.0}}}) {
    REQUIRE(is_factorized(f));
    const TimeUnion fast(f, w, 20.0, 1.0, true);
    const TimeUnion slow(f, w, 20.0, 1.0, false);
    CHECK(fast.uses_shortcut());
    for (double delta : {0.0, 0.2, 0.69, 1.2})
      for (double s : {0.5, 5.0, 17.3, 19.9}) {
        CHECK(fast.weight(delta, s) == doctest::Approx(slow.weight(delta, s)).epsilon(1e-6).scale(1e-6));
        CHECK(fast.contains_offset(delta, s) == slow.contains_offset(delta, s));
      }
  }
}

TEST_CASE("time union weight for a constant lag") {
  // Active interval [max(s, 0), min(s + T, t)] inside the arc.
  const Rectangular r{TimeFunction::constant(0.7), TimeFunction::constant(3.0)};
  const TimeUnion u(r, [](double, double, double) { return 2.0; }, 20.0, 2.0);
  CHECK(u.weight(0.1, 5.0) == doctest::Approx(2.0 * 3.0));
  CHECK(u.weight(0.1, 18.5) == doctest::Approx(2.0 * 1.5));
  CHECK(u.weight(0.9, 5.0) == 0.0);
}

TEST_CASE("euclidean embedding") {
  GrowthHistory h;
  h.times = {0.0, 1.0, 2.0};
  h.n_angles = 8;
  h.radii = Eigen::MatrixXd::Ones(3, 8);
  h.radii.row(1) *= 2.0;
  h.radii.row(2) *= 3.0;
  const Rectangular r{TimeFunction::constant(0.5), TimeFunction::constant(1.0)};
  const Embedding e = euclidean_embedding(h, r, 2.0, h.angle(2));
  CHECK(e.touch.x == doctest::Approx(3.0 * std::cos(h.angle(2))));
  CHECK(e.touch.y == doctest::Approx(3.0 * std::sin(h.angle(2))));
  for (const PlanarPoint& p : e.boundary) {
    const double rad = std::hypot(p.x, p.y);
    CHECK(rad >= 2.0 - 1e-9);
    CHECK(rad <= 3.0 + 1e-9);
  }
  h.radii(2, 3) = 0.5;
  CHECK_THROWS_AS(euclidean_embedding(h, r, 2.0, 0.0), NonMonotoneRadius);
}

}  // TEST_SUITE
