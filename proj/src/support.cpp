#include <algorithm>
#include <cmath>

#include "lgm/error.hpp"
#include "lgm/history.hpp"
#include "lgm/levy_core.hpp"
#include "lgm/time_function.hpp"
#include "lgm/tumour.hpp"

namespace lgm {

TimeFunction TimeFunction::table(std::vector<double> knots, std::vector<double> values) {
  if (knots.empty() || knots.size() != values.size()) throw InvalidArgument("time table needs matching knots and values");
  for (std::size_t i = 1; i < knots.size(); ++i)
    if (!(knots[i] > knots[i - 1])) throw InvalidArgument("time table knots must increase");
  if (knots.size() == 1) return constant(values.front());
  return TimeFunction([k = std::move(knots), v = std::move(values)](double t) {
    if (t <= k.front()) return v.front();
    if (t >= k.back()) return v.back();
    const auto it = std::upper_bound(k.begin(), k.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - k.begin()) - 1;
    const double w = (t - k[i]) / (k[i + 1] - k[i]);
    return (1.0 - w) * v[i] + w * v[i + 1];
  });
}

TumourTable::TumourTable(std::vector<TumourRow> rows) : rows_(std::move(rows)) {
  if (rows_.empty()) throw InvalidArgument("tumour table needs at least one row");
  std::sort(rows_.begin(), rows_.end(), [](const TumourRow& a, const TumourRow& b) { return a.t < b.t; });
  for (const TumourRow& r : rows_) {
    if (!(r.t0 > 0.0 && r.t0 <= r.lag && r.lag <= r.t))
      throw InvalidArgument("tumour row needs 0 < t0 <= T <= t");
    if (!(r.phi0 > 0.0 && r.phi0 <= kTwoPi)) throw InvalidArgument("tumour row needs phi0 in (0, 2 pi]");
  }
}

const TumourRow& TumourTable::at(double t) const {
  if (rows_.empty()) throw InvalidArgument("empty tumour table");
  const TumourRow* best = &rows_.front();
  for (const TumourRow& r : rows_)
    if (r.t <= t + 1e-12) best = &r;
  return *best;
}

double TumourTable::band_half_width(const TumourRow& row, double u) {
  return 0.5 * row.phi0 - 0.5 * row.phi0 / row.t0 * u;
}

double GrowthHistory::angle(int i) const { return -kPi + (i + 0.5) * kTwoPi / n_angles; }

double GrowthHistory::radius_at(double theta, double s) const {
  if (times.empty() || n_angles == 0) throw InvalidArgument("empty history");
  const double dphi = kTwoPi / n_angles;
  const double u = (wrap_angle(theta) + kPi) / dphi - 0.5;
  const double fl = std::floor(u);
  const double fa = u - fl;
  const int i0 = ((static_cast<int>(fl) % n_angles) + n_angles) % n_angles;
  const int i1 = (i0 + 1) % n_angles;
  auto at_row = [&](Eigen::Index r) { return (1.0 - fa) * radii(r, i0) + fa * radii(r, i1); };
  if (times.size() == 1 || s <= times.front()) return at_row(0);
  if (s >= times.back()) return at_row(static_cast<Eigen::Index>(times.size()) - 1);
  const auto it = std::upper_bound(times.begin(), times.end(), s);
  const auto r = static_cast<Eigen::Index>(it - times.begin()) - 1;
  const double w = (s - times[r]) / (times[r + 1] - times[r]);
  return (1.0 - w) * at_row(r) + w * at_row(r + 1);
}

bool GrowthHistory::monotone_in_time() const {
  for (Eigen::Index r = 1; r < radii.rows(); ++r)
    if ((radii.row(r).array() < radii.row(r - 1).array()).any()) return false;
  return true;
}

}  // namespace lgm
