#include "lgm/weights.hpp"

#include <algorithm>
#include <cmath>

namespace lgm {

namespace {

double interp(const std::vector<double>& x, const double* y, std::ptrdiff_t stride, double t) {
  if (t <= x.front()) return y[0];
  if (t >= x.back()) return y[(x.size() - 1) * stride];
  const auto it = std::upper_bound(x.begin(), x.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
  const double u = (t - x[i]) / (x[i + 1] - x[i]);
  return (1.0 - u) * y[i * stride] + u * y[(i + 1) * stride];
}

void check_knots(const std::vector<double>& knots, std::size_t n_values) {
  if (knots.empty() || knots.size() != n_values) throw InvalidArgument("table knots and values differ in length");
  if (!std::is_sorted(knots.begin(), knots.end()) ||
      std::adjacent_find(knots.begin(), knots.end()) != knots.end())
    throw InvalidArgument("table knots must be strictly increasing");
}

}  // namespace

FourierWeight::FourierWeight(int k_max, CoeffFn coeff, bool s_independent, std::optional<std::vector<double>> c)
    : k_max_(k_max), coeff_(std::move(coeff)), s_independent_(s_independent), c_(std::move(c)) {
  if (k_max < 0) throw InvalidArgument("Fourier weight needs k_max >= 0");
}

FourierWeight FourierWeight::constant(std::vector<double> a) {
  const int k_max = static_cast<int>(a.size()) - 1;
  return FourierWeight(k_max, [a = std::move(a)](int k, double, double) { return a[k]; }, true);
}

FourierWeight FourierWeight::separable(TimeFunction b, std::vector<double> c) {
  const int k_max = static_cast<int>(c.size()) - 1;
  auto coeff = [b, c](int k, double t, double) { return b(t) * c[k]; };
  return FourierWeight(k_max, coeff, true, c);
}

FourierWeight FourierWeight::stationary(std::vector<std::function<double(double)>> b) {
  const int k_max = static_cast<int>(b.size()) - 1;
  return FourierWeight(k_max, [b = std::move(b)](int k, double t, double s) { return b[k](t - s); }, false);
}

FourierWeight FourierWeight::tabulated(std::vector<double> s_knots, Eigen::MatrixXd table) {
  check_knots(s_knots, static_cast<std::size_t>(table.cols()));
  const int k_max = static_cast<int>(table.rows()) - 1;
  Eigen::MatrixXd row_major = table.transpose();  // contiguous per k
  auto coeff = [s_knots = std::move(s_knots), row_major = std::move(row_major)](int k, double, double s) {
    return interp(s_knots, row_major.col(k).data(), 1, s);
  };
  return FourierWeight(k_max, coeff, false);
}

double FourierWeight::value(double t, double delta, double s) const {
  double sum = 0.0;
  for (int k = 0; k <= k_max_; ++k) sum += coeff_(k, t, s) * (k == 0 ? 1.0 : std::cos(k * delta));
  return sum;
}

double WeightFunction::operator()(double t, double delta, double s) const {
  if (const auto* c = std::get_if<ConstantWeight>(&kind_)) return c->c;
  if (const auto* f = std::get_if<FourierWeight>(&kind_)) return f->value(t, delta, s);
  if (const auto* w = std::get_if<TumourWeight>(&kind_)) {
    const TumourRow& row = w->table.at(t);
    const double band_start = t - row.t0;
    if (s > t || s < t - row.lag) return 0.0;
    if (s <= band_start) return row.alpha * std::cos(delta);
    return std::abs(delta) <= TumourTable::band_half_width(row, s - band_start) ? row.beta : 0.0;
  }
  return std::get<CustomWeight>(kind_).fn(t, delta, s);
}

std::optional<double> WeightFunction::constant_value() const {
  if (const auto* c = std::get_if<ConstantWeight>(&kind_)) return c->c;
  return std::nullopt;
}

DriftFunction::DriftFunction(Kind kind) : kind_(std::move(kind)) {
  if (const auto* t = std::get_if<TableDrift>(&kind_)) {
    check_knots(t->knots, static_cast<std::size_t>(t->values.rows()));
    if (t->values.cols() < 1) throw InvalidArgument("drift table needs at least one column");
  }
  if (const auto* g = std::get_if<GompertzDrift>(&kind_); g && !(g->gamma > 0.0))
    throw InvalidArgument("Gompertz drift needs gamma > 0");
}

DriftFunction DriftFunction::table(std::vector<double> knots, std::vector<double> values, bool step) {
  Eigen::MatrixXd v = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  return DriftFunction(TableDrift{std::move(knots), std::move(v), step});
}

double DriftFunction::operator()(double t, double phi) const {
  if (const auto* c = std::get_if<ConstantDrift>(&kind_)) return c->c;
  if (const auto* g = std::get_if<GompertzDrift>(&kind_)) {
    const double e = std::exp(-g->gamma * t);
    return g->kappa0 * std::exp(g->eta / g->gamma * (1.0 - e)) * g->eta * e;
  }
  const auto& tab = std::get<TableDrift>(kind_);
  auto at_col = [&](Eigen::Index col) {
    const double* y = tab.values.col(col).data();
    if (!tab.step) return interp(tab.knots, y, 1, t);
    const auto it = std::upper_bound(tab.knots.begin(), tab.knots.end(), t);
    return y[it == tab.knots.begin() ? 0 : (it - tab.knots.begin()) - 1];
  };
  const Eigen::Index n = tab.values.cols();
  if (n == 1) return at_col(0);
  const double x = (wrap_angle(phi) + kPi) / (kTwoPi / static_cast<double>(n)) - 0.5;
  const double fl = std::floor(x);
  const double u = x - fl;
  const Eigen::Index j0 = ((static_cast<Eigen::Index>(fl) % n) + n) % n;
  return (1.0 - u) * at_col(j0) + u * at_col((j0 + 1) % n);
}

double DriftFunction::integral(double t, double phi) const {
  if (const auto* c = std::get_if<ConstantDrift>(&kind_)) return c->c * t;
  if (const auto* g = std::get_if<GompertzDrift>(&kind_))
    return g->kappa0 * (std::exp(g->eta / g->gamma * (1.0 - std::exp(-g->gamma * t))) - 1.0);
  const auto& tab = std::get<TableDrift>(kind_);
  return piecewise_gauss([&](double s) { return (*this)(s, phi); }, 0.0, t, tab.knots,
                         std::max(t / 16.0, 1e-12));
}

}  // namespace lgm
