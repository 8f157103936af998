#include "subpflow/geometry.hpp"

#include <cmath>
#include <random>

namespace subpflow {

HeisenbergPoint::HeisenbergPoint(int n_, std::vector<double> c) : n(n_), coords(std::move(c)) {
  if (n < 1) throw ValidationError("HeisenbergPoint: n must be >= 1");
  if (static_cast<int>(coords.size()) != 2 * n + 1)
    throw ValidationError("HeisenbergPoint: coords length must equal 2n+1");
}

HeisenbergPoint group_mul(const HeisenbergPoint& a, const HeisenbergPoint& b) {
  if (a.n != b.n) throw ValidationError("group_mul: dimension mismatch");
  const int n = a.n;
  HeisenbergPoint out(n, std::vector<double>(2 * n + 1, 0.0));
  for (int i = 0; i < 2 * n; ++i) out.coords[i] = a.coords[i] + b.coords[i];
  double twist = 0.0;
  for (int i = 0; i < n; ++i)
    twist += a.coords[i] * b.coords[n + i] - a.coords[n + i] * b.coords[i];
  out.coords[2 * n] = a.coords[2 * n] + b.coords[2 * n] + 0.5 * twist;
  return out;
}

HeisenbergPoint group_inv(const HeisenbergPoint& a) {
  HeisenbergPoint out = a;
  for (double& c : out.coords) c = -c;
  return out;
}

double koranyi_gauge(const HeisenbergPoint& a) {
  double h2 = 0.0;
  for (int i = 0; i < 2 * a.n; ++i) h2 += a.coords[i] * a.coords[i];
  const double z = a.coords[2 * a.n];
  return std::pow(h2 * h2 + 16.0 * z * z, 0.25);
}

double gauge_distance(const HeisenbergPoint& x, const HeisenbergPoint& y) {
  if (x.n != y.n) throw ValidationError("gauge_distance: dimension mismatch");
  return koranyi_gauge(group_mul(group_inv(y), x));
}

HeisenbergPoint dilate(const HeisenbergPoint& a, double lambda) {
  HeisenbergPoint out = a;
  for (int i = 0; i < 2 * a.n; ++i) out.coords[i] *= lambda;
  out.coords[2 * a.n] *= lambda * lambda;
  return out;
}

bool cylinder_contains(const CylinderSpec& c, const HeisenbergPoint& x, double t) {
  if (t > c.t0 || t <= c.t_bottom()) return false;
  return gauge_distance(x, c.center) < c.r;
}

double gauge_distance_raw(int n, const double* x, const double* center) {
  double h2 = 0.0;
  for (int i = 0; i < 2 * n; ++i) {
    const double d = x[i] - center[i];
    h2 += d * d;
  }
  double twist = 0.0;
  for (int i = 0; i < n; ++i)
    twist += center[i] * x[n + i] - center[n + i] * x[i];
  const double wz = x[2 * n] - center[2 * n] - 0.5 * twist;
  return std::pow(h2 * h2 + 16.0 * wz * wz, 0.25);
}

int homogeneous_dimension(int n) {
  if (n < 1) throw ValidationError("homogeneous_dimension: n must be >= 1");
  return 2 * n + 2;
}

BallVolumeEstimate ball_volume_mc(int n, double r, long samples, std::uint64_t seed) {
  if (samples < 1) throw ValidationError("ball_volume_mc: samples must be >= 1");
  // Bounding box of B(0, r): |x_i| <= r on the horizontal layer, |z| <= r^2/4.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uh(-r, r);
  std::uniform_real_distribution<double> uz(-r * r / 4.0, r * r / 4.0);
  HeisenbergPoint p = HeisenbergPoint::origin(n);
  long hits = 0;
  for (long s = 0; s < samples; ++s) {
    for (int i = 0; i < 2 * n; ++i) p.coords[i] = uh(rng);
    p.coords[2 * n] = uz(rng);
    if (koranyi_gauge(p) < r) ++hits;
  }
  double box = std::pow(2.0 * r, 2 * n) * (r * r / 2.0);
  double q = static_cast<double>(hits) / static_cast<double>(samples);
  BallVolumeEstimate est;
  est.volume = q * box;
  est.stderr_ = box * std::sqrt(q * (1.0 - q) / static_cast<double>(samples));
  return est;
}

}  // namespace subpflow
