#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace lgm {

/// Radial profiles R_t(phi) on the angular grid phi_i = -pi + (i + 1/2) 2pi/n for a list of times.
struct GrowthHistory {
  std::vector<double> times;
  Eigen::MatrixXd radii;  // (times.size(), n_angles)
  std::string spec_hash;
  std::uint64_t seed = 0;
  int n_angles = 0;
  double dt = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;
  /// Set when some radius is <= 0 (possible for Gaussian direct models).
  bool has_nonpositive_radius = false;

  double angle(int i) const;
  /// R_s(theta) by linear interpolation in time and angle (angle cyclic).
  /// Times outside [times.front(), times.back()] are clamped.
  double radius_at(double theta, double s) const;
  /// True when R is non-decreasing in time at every angle.
  bool monotone_in_time() const;
};

}  // namespace lgm
