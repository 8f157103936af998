#pragma once

#include <cstdint>
#include <vector>

#include "subpflow/common.hpp"

namespace subpflow {

/// Point of H^n in exponential coordinates (x_1..x_2n, z). The first 2n
/// coordinates span the horizontal layer, the last one the group center.
struct HeisenbergPoint {
  int n = 1;
  std::vector<double> coords;  // length 2n+1

  HeisenbergPoint() : coords(3, 0.0) {}
  HeisenbergPoint(int n_, std::vector<double> c);
  static HeisenbergPoint origin(int n) { return HeisenbergPoint(n, std::vector<double>(2 * n + 1, 0.0)); }

  int dims() const { return 2 * n + 1; }
  double z() const { return coords.back(); }
};

/// Parabolic cylinder in Koranyi geometry: gauge ball of radius r around
/// `center` crossed with the time interval (t0 - mu*r^2, t0].
struct CylinderSpec {
  HeisenbergPoint center;
  double t0 = 0.0;
  double r = 1.0;
  double mu = 1.0;

  double time_extent() const { return mu * r * r; }
  double t_bottom() const { return t0 - time_extent(); }
};

/// Group law chosen so that the frame X_i = d_i - (x_{n+i}/2) d_z,
/// X_{n+i} = d_{n+i} + (x_i/2) d_z is left-invariant.
HeisenbergPoint group_mul(const HeisenbergPoint& a, const HeisenbergPoint& b);

HeisenbergPoint group_inv(const HeisenbergPoint& a);

/// Koranyi gauge: ||x||^4 = (sum_i x_i^2)^2 + 16 z^2.
double koranyi_gauge(const HeisenbergPoint& a);

/// d_0(x, y) = ||y^{-1} x||.
double gauge_distance(const HeisenbergPoint& x, const HeisenbergPoint& y);

/// Anisotropic dilation (l*x_H, l^2*z); the gauge scales exactly by l.
HeisenbergPoint dilate(const HeisenbergPoint& a, double lambda);

bool cylinder_contains(const CylinderSpec& c, const HeisenbergPoint& x, double t);

/// Allocation-free gauge distance for hot loops; x and center point at 2n+1
/// coordinates.
double gauge_distance_raw(int n, const double* x, const double* center);

/// Homogeneous dimension N = 2n + 2.
int homogeneous_dimension(int n);

/// Monte-Carlo estimate of the gauge-ball volume |B(0, r)| in H^n, with the
/// 1-sigma standard error of the estimate. Used as a consistency oracle for
/// the homogeneous dimension (|B(0,2r)|/|B(0,r)| ~ 2^N).
struct BallVolumeEstimate {
  double volume = 0.0;
  double stderr_ = 0.0;
};
BallVolumeEstimate ball_volume_mc(int n, double r, long samples, std::uint64_t seed);

}  // namespace subpflow
