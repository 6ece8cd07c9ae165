#pragma once

#include <vector>

namespace lgm {

/// One row of the tumour model parameter table.
struct TumourRow {
  double t;
  double lag;     // T(t)
  double t0;      // t0(t)
  double alpha;   // weight of the cos(phi - theta) term
  double beta;    // weight of the shrinking band
  double phi0;    // angular width of the band at s = t - t0
};

/// Rows sorted by t, used piecewise-constant: time t takes the last row with row.t <= t
/// (the first row before the table starts).
class TumourTable {
 public:
  TumourTable() = default;
  explicit TumourTable(std::vector<TumourRow> rows);

  const TumourRow& at(double t) const;
  const std::vector<TumourRow>& rows() const { return rows_; }

  /// Band half-width h_t(u) = phi0/2 - phi0/(2 t0) u on u in [0, t0].
  static double band_half_width(const TumourRow& row, double u);

 private:
  std::vector<TumourRow> rows_;
};

}  // namespace lgm
