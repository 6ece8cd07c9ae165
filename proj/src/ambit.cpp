#include "lgm/ambit.hpp"

#include <algorithm>
#include <cmath>

namespace lgm {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

/// Largest theta in [0, pi] with h(theta) >= s, for h decreasing on [0, pi].
double invert_decreasing(const std::function<double(double)>& h, double s) {
  if (h(kPi) >= s) return kPi;
  if (h(0.0) < s) return -1.0;
  double lo = 0.0;
  double hi = kPi;
  for (int i = 0; i < 80 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) >= s ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

BoundaryFn cosine_boundary(double c) {
  if (!(c > 0.0)) throw InvalidArgument("cosine boundary needs c > 0");
  return BoundaryFn{[c](double t, double theta) { return t - c + c * std::cos(theta); }};
}

double window_lo(const AmbitFamily& family, double t) {
  return std::visit(Overloaded{[&](const FullAngle& f) { return t - f.lag(t); },
                               [&](const Rectangular& f) { return t - f.lag(t); },
                               [&](const WedgeOverS& f) { return std::max(0.0, t - f.lag); },
                               [&](const BoundaryFn& f) { return f.h(t, kPi); },
                               [&](const TumourSet& f) { return t - f.table.at(t).lag; }},
                    family);
}

Interval window(const AmbitFamily& family, double t) { return {window_lo(family, t), t}; }

double half_width(const AmbitFamily& family, double t, double s) {
  if (!window(family, t).contains(s)) return -1.0;
  return std::visit(Overloaded{[&](const FullAngle&) { return kPi; },
                               [&](const Rectangular& f) { return std::clamp(f.half_width(s), 0.0, kPi); },
                               [&](const WedgeOverS& f) { return s <= f.theta / kPi ? kPi : f.theta / s; },
                               [&](const BoundaryFn& f) {
                                 return invert_decreasing([&](double th) { return f.h(t, th); }, s);
                               },
                               [&](const TumourSet& f) {
                                 const TumourRow& row = f.table.at(t);
                                 const double band_start = t - row.t0;
                                 if (s <= band_start) return kPi;
                                 return std::clamp(TumourTable::band_half_width(row, s - band_start), 0.0, kPi);
                               }},
                    family);
}

std::vector<double> time_breakpoints(const AmbitFamily& family, double t) {
  std::vector<double> out;
  std::visit(Overloaded{[](const FullAngle&) {}, [](const Rectangular&) {}, [](const BoundaryFn&) {},
                        [&](const WedgeOverS& f) { out.push_back(f.theta / kPi); },
                        [&](const TumourSet& f) { out.push_back(t - f.table.at(t).t0); }},
             family);
  out.push_back(0.0);
  return out;
}

bool contains(const AmbitFamily& family, double t, double phi, double theta, double s) {
  const double w = half_width(family, t, s);
  return w >= 0.0 && cyclic_distance(theta, phi) <= w;
}

bool is_factorized(const AmbitFamily& family) {
  return std::holds_alternative<FullAngle>(family) || std::holds_alternative<Rectangular>(family) ||
         std::holds_alternative<WedgeOverS>(family);
}

double factor_half_width(const AmbitFamily& family, double s) {
  return std::visit(Overloaded{[&](const FullAngle&) { return kPi; },
                               [&](const Rectangular& f) { return std::clamp(f.half_width(s), 0.0, kPi); },
                               [&](const WedgeOverS& f) { return s <= f.theta / kPi ? kPi : f.theta / s; },
                               [&](const auto&) -> double {
                                 throw AssumptionViolation("ambit family does not factorize as B_t cap C_phi");
                               }},
                    family);
}

std::optional<Interval> time_overlap(double t1, double lag1, double t2, double lag2) {
  if (lag1 < 0.0 || lag2 < 0.0) throw InvalidArgument("time lags must be >= 0");
  const Interval iv{std::max(t1 - lag1, t2 - lag2), std::min(t1, t2)};
  if (iv.empty()) return std::nullopt;
  return iv;
}

double arc_overlap(double w1, double w2, double d) {
  if (w1 < 0.0 || w2 < 0.0) return 0.0;
  w1 = std::min(w1, kPi);
  w2 = std::min(w2, kPi);
  if (w1 >= kPi) return 2.0 * w2;
  if (w2 >= kPi) return 2.0 * w1;
  double total = 0.0;
  for (int m = -1; m <= 1; ++m) {
    const double lo = std::max(-w1, d - w2 + m * kTwoPi);
    const double hi = std::min(w1, d + w2 + m * kTwoPi);
    if (hi > lo) total += hi - lo;
  }
  return std::min(total, kTwoPi);
}

namespace {

std::vector<double> merged_breaks(const AmbitFamily& family, double t1, double t2) {
  std::vector<double> b = time_breakpoints(family, t1);
  const std::vector<double> b2 = time_breakpoints(family, t2);
  b.insert(b.end(), b2.begin(), b2.end());
  std::sort(b.begin(), b.end());
  return b;
}

}  // namespace

double measure(const AmbitFamily& family, double t, const ControlMeasure& control) {
  const Interval win = window(family, t);
  if (std::holds_alternative<FullAngle>(family)) return kTwoPi * control.integral(win);
  if (const auto* r = std::get_if<Rectangular>(&family); r && r->half_width.constant_value())
    return 2.0 * std::clamp(*r->half_width.constant_value(), 0.0, kPi) * control.integral(win);
  if (const auto* b = std::get_if<BoundaryFn>(&family))
    return mu_self_intersection_direct([&](double th) { return b->h(t, th); }, control, 0.0);
  const Interval clipped{std::max(win.lo, 0.0), win.hi};
  if (clipped.empty()) return 0.0;
  const std::vector<double> breaks = time_breakpoints(family, t);
  return piecewise_gauss([&](double s) { return 2.0 * half_width(family, t, s) * control.g(s); }, clipped.lo,
                         clipped.hi, breaks, std::max(clipped.length() / 64.0, 1e-12));
}

double intersection_measure_quadrature(const AmbitFamily& family, double t1, double phi1, double t2, double phi2,
                                       const ControlMeasure& control, double rel_tol) {
  Interval iv = intersect(window(family, t1), window(family, t2));
  iv.lo = std::max(iv.lo, 0.0);
  if (iv.empty() || iv.length() == 0.0) return 0.0;
  const double d = cyclic_distance(phi1, phi2);
  const double scale = std::max(measure(family, t1, control), 1e-300);
  const double tol = rel_tol * scale;
  auto integrand = [&](double s) {
    return control.g(s) * arc_overlap(half_width(family, t1, s), half_width(family, t2, s), d);
  };
  std::vector<double> pts{iv.lo};
  for (double b : merged_breaks(family, t1, t2))
    if (b > iv.lo && b < iv.hi) pts.push_back(b);
  pts.push_back(iv.hi);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    total += adaptive_simpson(integrand, pts[i], pts[i + 1], tol / static_cast<double>(pts.size()), 16);
  return total;
}

double intersection_measure(const AmbitFamily& family, double t1, double phi1, double t2, double phi2,
                            const ControlMeasure& control, double rel_tol) {
  if (const auto* f = std::get_if<FullAngle>(&family)) {
    const auto iv = time_overlap(t1, f->lag(t1), t2, f->lag(t2));
    return iv ? kTwoPi * control.integral(*iv) : 0.0;
  }
  if (const auto* b = std::get_if<BoundaryFn>(&family); b && t1 == t2)
    return mu_self_intersection_direct([&](double th) { return b->h(t1, th); }, control, phi1 - phi2);
  return intersection_measure_quadrature(family, t1, phi1, t2, phi2, control, rel_tol);
}

double mu_self_intersection_direct(const std::function<double(double)>& h, const ControlMeasure& control, double phi) {
  const double a = std::abs(wrap_angle(phi));
  const double p = std::min(a, kTwoPi - a);
  auto hbar = [&](double theta) { return control.cumulative(h(theta)); };
  const double piece = kPi / 32.0;
  const double left = piecewise_gauss(hbar, -kPi, -kPi + 0.5 * p, {}, piece);
  const double right = piecewise_gauss(hbar, 0.5 * p, kPi, {}, piece);
  return 2.0 * left + 2.0 * right - kTwoPi * hbar(kPi);
}

// --- time unions -------------------------------------------------------------------------------

TimeUnion::TimeUnion(AmbitFamily family, WeightFn weight, double t, std::optional<double> constant_weight,
                     bool use_shortcut)
    : family_(std::move(family)),
      weight_(std::move(weight)),
      t_(t),
      constant_(constant_weight),
      shortcut_(use_shortcut && is_factorized(family_)) {
  if (t < 0.0) throw InvalidArgument("time union needs t >= 0");
}

Interval TimeUnion::window() const {
  double lo = window_lo(family_, 0.0);
  constexpr int kSamples = 256;
  for (int i = 1; i <= kSamples; ++i) lo = std::min(lo, window_lo(family_, t_ * i / kSamples));
  return {lo, t_};
}

double TimeUnion::half_width(double s) const {
  if (s > t_) return -1.0;
  return shortcut_ ? factor_half_width(family_, s) : kPi;
}

std::vector<Interval> TimeUnion::scan(const std::function<bool(double)>& member, double lo, double hi) const {
  std::vector<Interval> out;
  if (hi < lo) return out;
  if (hi == lo) return out;
  constexpr int kSamples = 256;
  auto refine = [&](double a, double b, bool a_in) {
    for (int i = 0; i < 100 && b - a > 1e-15 * std::max(1.0, std::abs(b)); ++i) {
      const double m = 0.5 * (a + b);
      (member(m) == a_in ? a : b) = m;
    }
    return 0.5 * (a + b);
  };
  double prev = lo;
  bool prev_in = member(lo);
  double start = lo;
  for (int i = 1; i <= kSamples; ++i) {
    const double x = i == kSamples ? hi : lo + (hi - lo) * i / kSamples;
    const bool in = member(x);
    if (in != prev_in) {
      const double edge = refine(prev, x, prev_in);
      if (in) start = edge;
      else out.push_back({start, edge});
    }
    prev = x;
    prev_in = in;
  }
  if (prev_in) out.push_back({start, hi});
  return out;
}

std::vector<Interval> TimeUnion::active_times(double delta, double s) const {
  const double lo = std::max(s, 0.0);
  if (s > t_) return {};
  if (shortcut_) {
    if (delta > factor_half_width(family_, s)) return {};
    const TimeFunction* lag = nullptr;
    if (const auto* f = std::get_if<FullAngle>(&family_)) lag = &f->lag;
    if (const auto* f = std::get_if<Rectangular>(&family_)) lag = &f->lag;
    std::optional<double> constant_lag;
    if (lag) constant_lag = lag->constant_value();
    if (const auto* f = std::get_if<WedgeOverS>(&family_)) {
      if (s < 0.0) return {};
      constant_lag = f->lag;
    }
    if (constant_lag) {
      const Interval iv{lo, std::min(s + *constant_lag, t_)};
      if (iv.empty()) return {};
      return {iv};
    }
    return scan([&](double sp) { return window_lo(family_, sp) <= s; }, lo, t_);
  }
  return scan([&](double sp) { return contains(family_, sp, 0.0, delta, s); }, lo, t_);
}

double TimeUnion::weight(double delta, double s) const {
  double total = 0.0;
  for (const Interval& iv : active_times(delta, s)) {
    if (constant_) {
      total += *constant_ * iv.length();
    } else {
      total += piecewise_gauss([&](double sp) { return weight_(sp, delta, s); }, iv.lo, iv.hi, {},
                               std::max(iv.length() / 4.0, 1e-12));
    }
  }
  return total;
}

// --- embedding ------------------------------------------------------------------------------------

PlanarPoint embed(const GrowthHistory& history, double theta, double s) {
  const double r = history.radius_at(theta, s);
  return {r * std::cos(theta), r * std::sin(theta)};
}

Embedding euclidean_embedding(const GrowthHistory& history, const AmbitFamily& family, double t, double phi,
                              const BasisRealization* realization, int samples) {
  if (!history.monotone_in_time())
    throw NonMonotoneRadius("t -> R_t(phi) decreases somewhere; the ambit set has no embedding");
  if (samples < 2) throw InvalidArgument("embedding needs at least two samples per edge");
  Embedding out;
  out.touch = embed(history, phi, t);
  const Interval win = window(family, t);
  const double lo = std::max(win.lo, history.times.empty() ? win.lo : history.times.front());
  auto edge_s = [&](int i) { return lo + (t - lo) * i / (samples - 1); };
  auto arc = [&](double s, bool forward) {
    const double w = half_width(family, t, s);
    for (int i = 0; i < samples; ++i) {
      const double u = static_cast<double>(i) / (samples - 1);
      const double th = forward ? phi - w + 2.0 * w * u : phi + w - 2.0 * w * u;
      out.boundary.push_back(embed(history, th, s));
    }
  };
  arc(lo, true);
  for (int i = 0; i < samples; ++i) {
    const double s = edge_s(i);
    out.boundary.push_back(embed(history, phi + std::max(half_width(family, t, s), 0.0), s));
  }
  arc(t, false);
  for (int i = samples - 1; i >= 0; --i) {
    const double s = edge_s(i);
    out.boundary.push_back(embed(history, phi - std::max(half_width(family, t, s), 0.0), s));
  }
  if (realization && realization->kind() == BasisKind::Poisson) {
    for (const PoissonPoint& p : realization->points())
      if (p.s <= t && contains(family, t, phi, p.theta, p.s)) out.points.push_back(embed(history, p.theta, p.s));
  }
  return out;
}

}  // namespace lgm
