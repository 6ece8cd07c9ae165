#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace lgm {

struct ParamSpec {
  std::string name;
  double lo;
  double hi;
  double start;
};

struct FitOptions {
  int max_iterations = 500;  // per start
  int starts = 4;            // the declared start plus starts - 1 seeded uniform draws inside the bounds
  double f_tol = 1e-10;      // relative spread of simplex values
  double x_tol = 1e-7;       // simplex diameter relative to the bound widths
  std::uint64_t seed = 1;
  int threads = 1;
  bool require_convergence = true;  // throw NonConvergence when no start converges
};

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> estimates;
  double objective = 0.0;
  /// Best objective value after every iteration of the winning start (non-increasing).
  std::vector<double> trace;
  bool converged = false;
  bool identifiable = true;
  int iterations = 0;
  int evaluations = 0;
  std::string note;
  /// Final point, objective and convergence of every start.
  std::vector<std::vector<double>> start_estimates;
  std::vector<double> start_objectives;
  std::vector<bool> start_converged;
};

/// Bounded Nelder-Mead with multi-start. Vertices are clamped into the box after every move. Each start runs
/// until the simplex collapses (f_tol and x_tol) and is then restarted once from its best vertex with a fresh
/// simplex; the start counts as converged when the restart improves the objective by less than f_tol.
/// Throws InfeasibleBounds and (with require_convergence) NonConvergence.
FitResult minimize_bounded(const std::function<double(std::span<const double>)>& objective,
                           const std::vector<ParamSpec>& params, const FitOptions& options);

/// Smallest over largest eigenvalue of a finite-difference Hessian (steps of 2% of the bound widths) at x.
double hessian_condition(const std::function<double(std::span<const double>)>& objective,
                         const std::vector<ParamSpec>& params, std::span<const double> x);

/// Clears result.identifiable (with a note) when the Hessian at the optimum is singular or when two starts
/// reach the best objective at points more than 5% of a bound width apart.
void assess_identifiability(const std::function<double(std::span<const double>)>& objective,
                            const std::vector<ParamSpec>& params, FitResult& result);

}  // namespace lgm
