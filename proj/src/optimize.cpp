#include "lgm/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "lgm/error.hpp"
#include "lgm/io.hpp"
#include "lgm/parallel.hpp"
#include "lgm/random.hpp"

namespace lgm {

namespace {

using Vec = std::vector<double>;

struct StartResult {
  Vec x;
  double f = std::numeric_limits<double>::infinity();
  std::vector<double> trace;
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
};

class NelderMead {
 public:
  NelderMead(const std::function<double(std::span<const double>)>& f, const std::vector<ParamSpec>& p,
             const FitOptions& o)
      : f_(f), p_(p), o_(o) {}

  StartResult run(Vec x0) {
    StartResult out;
    out.x = clamp(std::move(x0));
    out.f = eval(out.x, out);
    bool collapsed = descend(out);
    if (collapsed) {
      const double before = out.f;
      collapsed = descend(out);
      out.converged = collapsed && before - out.f <= o_.f_tol * (std::abs(before) + 1e-300) + 1e-300;
    }
    return out;
  }

 private:
  Vec clamp(Vec x) const {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], p_[i].lo, p_[i].hi);
    return x;
  }

  double eval(const Vec& x, StartResult& out) const {
    ++out.evaluations;
    const double v = f_(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  }

  // One Nelder-Mead descent from out.x; returns true when the simplex collapsed.
  bool descend(StartResult& out) const {
    const std::size_t n = out.x.size();
    std::vector<Vec> simplex{out.x};
    std::vector<double> values{out.f};
    for (std::size_t i = 0; i < n; ++i) {
      Vec v = out.x;
      const double width = p_[i].hi - p_[i].lo;
      const double step = 0.1 * width;
      v[i] = v[i] + step <= p_[i].hi ? v[i] + step : v[i] - step;
      v = clamp(std::move(v));
      simplex.push_back(v);
      values.push_back(eval(v, out));
    }
    std::vector<std::size_t> order(n + 1);
    for (int iter = 0; iter < o_.max_iterations; ++iter) {
      ++out.iterations;
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
      const std::size_t best = order.front();
      const std::size_t worst = order.back();
      const std::size_t second = order[n - 1];
      if (values[best] < out.f) {
        out.f = values[best];
        out.x = simplex[best];
      }
      out.trace.push_back(out.f);

      double diameter = 0.0;
      for (std::size_t v = 0; v <= n; ++v)
        for (std::size_t i = 0; i < n; ++i)
          diameter = std::max(diameter, std::abs(simplex[v][i] - simplex[best][i]) / (p_[i].hi - p_[i].lo));
      const double spread = values[worst] - values[best];
      if (spread <= o_.f_tol * (std::abs(values[best]) + 1e-300) + 1e-300 && diameter <= o_.x_tol) return true;
      if (diameter <= 1e-14) return true;

      Vec centroid(n, 0.0);
      for (std::size_t v = 0; v <= n; ++v)
        if (v != worst)
          for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[v][i] / static_cast<double>(n);
      auto along = [&](double coef) {
        Vec x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = centroid[i] + coef * (simplex[worst][i] - centroid[i]);
        return clamp(std::move(x));
      };
      const Vec reflected = along(-1.0);
      const double fr = eval(reflected, out);
      if (fr < values[best]) {
        const Vec expanded = along(-2.0);
        const double fe = eval(expanded, out);
        if (fe < fr) {
          simplex[worst] = expanded;
          values[worst] = fe;
        } else {
          simplex[worst] = reflected;
          values[worst] = fr;
        }
        continue;
      }
      if (fr < values[second]) {
        simplex[worst] = reflected;
        values[worst] = fr;
        continue;
      }
      const bool outside = fr < values[worst];
      const Vec contracted = along(outside ? -0.5 : 0.5);
      const double fc = eval(contracted, out);
      if (fc < std::min(fr, values[worst])) {
        simplex[worst] = contracted;
        values[worst] = fc;
        continue;
      }
      for (std::size_t v = 0; v <= n; ++v) {
        if (v == best) continue;
        for (std::size_t i = 0; i < n; ++i) simplex[v][i] = simplex[best][i] + 0.5 * (simplex[v][i] - simplex[best][i]);
        values[v] = eval(simplex[v], out);
      }
    }
    return false;
  }

  const std::function<double(std::span<const double>)>& f_;
  const std::vector<ParamSpec>& p_;
  const FitOptions& o_;
};

}  // namespace

FitResult minimize_bounded(const std::function<double(std::span<const double>)>& objective,
                           const std::vector<ParamSpec>& params, const FitOptions& options) {
  if (params.empty()) throw InvalidArgument("nothing to fit");
  for (const ParamSpec& p : params)
    if (!(p.lo < p.hi) || !(p.start >= p.lo && p.start <= p.hi))
      throw InfeasibleBounds("parameter '" + p.name + "': need lo < hi and lo <= start <= hi, got [" +
                             format_double(p.lo) + ", " + format_double(p.hi) + "] start " + format_double(p.start));
  const int starts = std::max(1, options.starts);
  std::vector<Vec> x0(static_cast<std::size_t>(starts));
  Engine engine = make_engine(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < starts; ++s)
    for (const ParamSpec& p : params)
      x0[static_cast<std::size_t>(s)].push_back(s == 0 ? p.start : p.lo + unit(engine) * (p.hi - p.lo));

  std::vector<StartResult> results(static_cast<std::size_t>(starts));
  parallel_for(starts, options.threads, [&](int s) {
    results[static_cast<std::size_t>(s)] = NelderMead(objective, params, options).run(x0[static_cast<std::size_t>(s)]);
  });
  // Lowest objective wins; ties go to the earlier start so the choice is deterministic.
  std::size_t best = 0;
  for (std::size_t s = 1; s < results.size(); ++s)
    if (results[s].f < results[best].f) best = s;

  FitResult out;
  for (const ParamSpec& p : params) out.names.push_back(p.name);
  out.estimates = results[best].x;
  out.objective = results[best].f;
  out.trace = results[best].trace;
  out.iterations = results[best].iterations;
  for (const StartResult& r : results) out.evaluations += r.evaluations;
  for (const StartResult& r : results) {
    out.start_estimates.push_back(r.x);
    out.start_objectives.push_back(r.f);
    out.start_converged.push_back(r.converged);
  }
  out.converged = std::any_of(results.begin(), results.end(), [](const StartResult& r) { return r.converged; });
  if (!out.converged && options.require_convergence)
    throw NonConvergence("no start converged within " + std::to_string(options.max_iterations) + " iterations");
  return out;
}

double hessian_condition(const std::function<double(std::span<const double>)>& objective,
                         const std::vector<ParamSpec>& params, std::span<const double> x) {
  const auto n = static_cast<Eigen::Index>(params.size());
  Eigen::VectorXd h(n);
  for (Eigen::Index i = 0; i < n; ++i) h[i] = 0.02 * (params[i].hi - params[i].lo);
  auto f = [&](Eigen::VectorXd u) {
    Vec v(u.data(), u.data() + n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = std::clamp(v[i], params[i].lo, params[i].hi);
    return objective(v);
  };
  const Eigen::VectorXd x0 = Eigen::Map<const Eigen::VectorXd>(x.data(), n);
  const double f0 = f(x0);
  Eigen::MatrixXd H(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      Eigen::VectorXd pp = x0, pm = x0, mp = x0, mm = x0;
      pp[i] += h[i]; pp[j] += h[j];
      pm[i] += h[i]; pm[j] -= h[j];
      mp[i] -= h[i]; mp[j] += h[j];
      mm[i] -= h[i]; mm[j] -= h[j];
      double v;
      if (i == j) {
        Eigen::VectorXd p1 = x0, m1 = x0;
        p1[i] += h[i];
        m1[i] -= h[i];
        v = (f(p1) - 2.0 * f0 + f(m1));  // scaled second difference
      } else {
        v = (f(pp) - f(pm) - f(mp) + f(mm)) / 4.0;
      }
      H(i, j) = H(j, i) = v;
    }
  }
  const Eigen::VectorXd eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H).eigenvalues().cwiseAbs();
  const double top = eig.maxCoeff();
  return top > 0.0 ? eig.minCoeff() / top : 0.0;
}

void assess_identifiability(const std::function<double(std::span<const double>)>& objective,
                            const std::vector<ParamSpec>& params, FitResult& result) {
  if (hessian_condition(objective, params, result.estimates) < 1e-9) {
    result.identifiable = false;
    result.note = "objective is flat along some direction at the optimum";
    return;
  }
  const double tol = 1e-7 * (std::abs(result.objective) + 1e-12);
  for (std::size_t s = 0; s < result.start_estimates.size(); ++s) {
    if (!result.start_converged[s] || result.start_objectives[s] > result.objective + tol) continue;
    for (std::size_t i = 0; i < params.size(); ++i)
      if (std::abs(result.start_estimates[s][i] - result.estimates[i]) > 0.05 * (params[i].hi - params[i].lo)) {
        result.identifiable = false;
        result.note = "starts reach the same objective at distinct points (parameter '" + params[i].name + "')";
        return;
      }
  }
}

}  // namespace lgm
