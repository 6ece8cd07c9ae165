#pragma once

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "lgm/history.hpp"
#include "lgm/levy_core.hpp"
#include "lgm/time_function.hpp"
#include "lgm/tumour.hpp"

namespace lgm {

// ---------------------------------------------------------------------------
// Ambit families A_t(phi) on [-pi, pi) x R. Every supported family is a stack of
// angular arcs: for each s in the time window, {theta : d(theta, phi) <= w_t(s)}.
// ---------------------------------------------------------------------------

/// [-pi, pi) x [t - T(t), t].
struct FullAngle {
  TimeFunction lag;
};

/// {d(theta, phi) <= Theta(s), t - T(t) <= s <= t}; Theta is clamped to pi.
struct Rectangular {
  TimeFunction half_width;  // Theta(s)
  TimeFunction lag;         // T(t)
};

/// {d(theta, phi) <= Theta / s, max(0, t - T) <= s <= t}; full circle for s <= Theta / pi.
struct WedgeOverS {
  double theta;
  double lag;
};

/// {h_t(pi) <= s <= h_t(d(theta, phi))} with h_t even, decreasing on [0, pi), h_t(0) = t.
struct BoundaryFn {
  std::function<double(double t, double theta)> h;
};

/// Full angle on [t - T, t - t0] plus the band d(theta, phi) <= h_t(s - t + t0) on [t - t0, t].
struct TumourSet {
  TumourTable table;
};

using AmbitFamily = std::variant<FullAngle, Rectangular, WedgeOverS, BoundaryFn, TumourSet>;

/// h_t(theta) = t - c + c cos(theta), c > 0.
BoundaryFn cosine_boundary(double c);

/// Time window [lo(t), t] that contains A_t(phi).
Interval window(const AmbitFamily& family, double t);
/// Angular half-width of the arc of A_t(phi) at time s, in [0, pi]; negative outside the window.
double half_width(const AmbitFamily& family, double t, double s);
/// Times inside the window where the half-width is not smooth (for quadrature splitting).
std::vector<double> time_breakpoints(const AmbitFamily& family, double t);

bool contains(const AmbitFamily& family, double t, double phi, double theta, double s);

/// True when A_t(phi) = B_t cap C_phi with C_phi independent of t.
bool is_factorized(const AmbitFamily& family);
/// Half-width of C_phi at time s (factorized families only).
double factor_half_width(const AmbitFamily& family, double s);
/// Lower end of the time window of B_t, i.e. of A_t(phi) (without clipping by g's support).
double window_lo(const AmbitFamily& family, double t);

/// A_t(phi) as a region usable with integrate().
struct AmbitRegion {
  AmbitFamily family;
  double t;
  double phi;

  bool contains(double theta, double s) const { return lgm::contains(family, t, phi, theta, s); }
  Interval window() const { return lgm::window(family, t); }
};

/// Shared time points of A_{t1} and A_{t2}: [max(t1 - T1, t2 - T2), min(t1, t2)], or nullopt.
std::optional<Interval> time_overlap(double t1, double lag1, double t2, double lag2);

/// Length of the intersection of two arcs of half-widths w1, w2 whose centres are d apart.
double arc_overlap(double w1, double w2, double d);

/// mu(A_t(phi)).
double measure(const AmbitFamily& family, double t, const ControlMeasure& control);

/// mu(A_{t1}(phi1) cap A_{t2}(phi2)). Closed form for FullAngle and for BoundaryFn at equal times;
/// otherwise adaptive quadrature over s of g(s) times the exact arc overlap, to absolute tolerance
/// rel_tol * mu(A_{t1}(phi1)).
double intersection_measure(const AmbitFamily& family, double t1, double phi1, double t2, double phi2,
                            const ControlMeasure& control, double rel_tol = 1e-8);
/// Same quantity, always through the quadrature path.
double intersection_measure_quadrature(const AmbitFamily& family, double t1, double phi1, double t2, double phi2,
                                       const ControlMeasure& control, double rel_tol = 1e-8);

/// mu(A_t(0) cap A_t(phi)) for the set bounded by h (h even, decreasing on [0, pi)), evaluated as
///   2 int_{-pi}^{-pi+phi/2} hbar + 2 int_{phi/2}^{pi} hbar - 2 pi hbar(pi),  hbar(theta) = int_0^{h(theta)} g.
double mu_self_intersection_direct(const std::function<double(double)>& h, const ControlMeasure& control, double phi);

// ---------------------------------------------------------------------------
// Time unions: Abar_t(phi) = U_{0<=s'<=t} A_{s'}(phi) and fbar_t(xi) = int_0^t 1_{A_s'}(xi) f_s'(xi) ds'.
// ---------------------------------------------------------------------------

/// Weight f_t(delta, s) as a function of evaluation time t, cyclic offset delta and time s.
using WeightFn = std::function<double(double t, double delta, double s)>;

class TimeUnion {
 public:
  /// `constant_weight` enables closed forms when f is a known constant.
  TimeUnion(AmbitFamily family, WeightFn weight, double t, std::optional<double> constant_weight = std::nullopt,
            bool use_shortcut = true);

  /// Times s' in [0, t] at which (delta, s) lies in A_{s'}(0), as disjoint intervals.
  std::vector<Interval> active_times(double delta, double s) const;
  /// fbar_t at cyclic offset delta from phi and time s.
  double weight(double delta, double s) const;
  /// Membership in Abar_t.
  bool contains_offset(double delta, double s) const { return !active_times(delta, s).empty(); }
  /// Upper bound of the angular half-width of Abar_t at time s (pi when unknown).
  double half_width(double s) const;
  Interval window() const;
  double t() const { return t_; }
  bool uses_shortcut() const { return shortcut_; }

 private:
  std::vector<Interval> scan(const std::function<bool(double)>& member, double lo, double hi) const;

  AmbitFamily family_;
  WeightFn weight_;
  double t_;
  std::optional<double> constant_;
  bool shortcut_;
};

/// Abar_t(phi) as a region plus fbar_t(.; phi) in absolute coordinates.
struct TimeUnionRegion {
  const TimeUnion* union_;
  double phi;

  bool contains(double theta, double s) const { return union_->contains_offset(cyclic_distance(theta, phi), s); }
  Interval window() const { return union_->window(); }
  double weight(double theta, double s) const { return union_->weight(cyclic_distance(theta, phi), s); }
};

// ---------------------------------------------------------------------------
// Euclidean embedding of A_t(phi) into the growing object.
// ---------------------------------------------------------------------------

struct PlanarPoint {
  double x;
  double y;
};

struct Embedding {
  /// Closed boundary polyline of the embedded ambit set.
  std::vector<PlanarPoint> boundary;
  /// Embedded Poisson points (theta_i, t_i) in A_t(phi), when a realization was supplied.
  std::vector<PlanarPoint> points;
  /// The point (R_t(phi) cos phi, R_t(phi) sin phi) where the set touches the object boundary.
  PlanarPoint touch;
};

/// Maps (theta, s) to (R_s(theta) cos theta, R_s(theta) sin theta).
PlanarPoint embed(const GrowthHistory& history, double theta, double s);

/// Requires t -> R_t(phi) non-decreasing at every angle; throws NonMonotoneRadius otherwise.
/// `samples` controls the polyline resolution along each edge.
Embedding euclidean_embedding(const GrowthHistory& history, const AmbitFamily& family, double t, double phi,
                              const BasisRealization* realization = nullptr, int samples = 64);

}  // namespace lgm
