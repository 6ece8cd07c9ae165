#include <cmath>

#include "doctest.h"
#include "lgm/error.hpp"
#include "lgm/optimize.hpp"

using namespace lgm;

namespace {

double rosenbrock(std::span<const double> x) {
  return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
}

}  // namespace

TEST_SUITE("optimize") {

TEST_CASE("finds the Rosenbrock minimum") {
  FitOptions o;
  o.max_iterations = 2000;
  const FitResult r = minimize_bounded(rosenbrock, {{"x", -2.0, 2.0, -1.2}, {"y", -1.0, 3.0, 1.0}}, o);
  CHECK(r.converged);
  CHECK(r.estimates[0] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(r.estimates[1] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(r.objective < 1e-8);
}

TEST_CASE("respects bounds") {
  const auto f = [](std::span<const double> x) { return std::pow(x[0] + 3.0, 2) + std::pow(x[1] - 0.5, 2); };
  const FitResult r = minimize_bounded(f, {{"a", 0.0, 1.0, 0.5}, {"b", 0.0, 1.0, 0.9}}, {});
  CHECK(r.estimates[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
  CHECK(r.estimates[1] == doctest::Approx(0.5).epsilon(1e-4));
  for (const auto& x : r.start_estimates) {
    CHECK(x[0] >= 0.0);
    CHECK(x[0] <= 1.0);
  }
}

TEST_CASE("trace is non-increasing") {
  const FitResult r = minimize_bounded(rosenbrock, {{"x", -2.0, 2.0, -1.2}, {"y", -1.0, 3.0, 1.0}}, {});
  REQUIRE(!r.trace.empty());
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] <= r.trace[i - 1]);
  CHECK(r.trace.back() == r.objective);
}

TEST_CASE("deterministic for a seed and independent of threads") {
  FitOptions o;
  o.seed = 5;
  o.threads = 1;
  const FitResult a = minimize_bounded(rosenbrock, {{"x", -2.0, 2.0, 0.0}, {"y", -1.0, 3.0, 0.0}}, o);
  o.threads = 4;
  const FitResult b = minimize_bounded(rosenbrock, {{"x", -2.0, 2.0, 0.0}, {"y", -1.0, 3.0, 0.0}}, o);
  CHECK(a.estimates == b.estimates);
  CHECK(a.trace == b.trace);
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(minimize_bounded(rosenbrock, {{"x", 1.0, 0.0, 0.5}, {"y", 0.0, 1.0, 0.5}}, {}), InfeasibleBounds);
  CHECK_THROWS_AS(minimize_bounded(rosenbrock, {{"x", 0.0, 1.0, 2.0}, {"y", 0.0, 1.0, 0.5}}, {}), InfeasibleBounds);
  FitOptions o;
  o.max_iterations = 3;
  CHECK_THROWS_AS(minimize_bounded(rosenbrock, {{"x", -2.0, 2.0, -1.2}, {"y", -1.0, 3.0, 1.0}}, o), NonConvergence);
  o.require_convergence = false;
  CHECK_FALSE(minimize_bounded(rosenbrock, {{"x", -2.0, 2.0, -1.2}, {"y", -1.0, 3.0, 1.0}}, o).converged);
}

TEST_CASE("flat directions are flagged") {
  const auto f = [](std::span<const double> x) { return std::pow(x[0] * x[1] - 1.0, 2); };
  const std::vector<ParamSpec> p = {{"a", 0.1, 4.0, 2.0}, {"b", 0.1, 4.0, 2.0}};
  FitResult r = minimize_bounded(f, p, {});
  assess_identifiability(f, p, r);
  CHECK_FALSE(r.identifiable);
  CHECK(!r.note.empty());

  FitResult ok = minimize_bounded(rosenbrock, {{"x", -2.0, 2.0, -1.2}, {"y", -1.0, 3.0, 1.0}}, {});
  assess_identifiability(rosenbrock, {{"x", -2.0, 2.0, -1.2}, {"y", -1.0, 3.0, 1.0}}, ok);
  CHECK(ok.identifiable);
}

}  // TEST_SUITE
